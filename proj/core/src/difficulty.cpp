#include "reamot/difficulty.hpp"

#include <array>
#include <set>
#include <utility>

#include "json.hpp"
#include "reamot/error.hpp"

using nlohmann::json;

namespace reamot::difficulty {
namespace {

using C = Category;

constexpr std::array kRulebook{
    RubricEntry{C::SpatialPosition, "orientation", 1, 1},
    RubricEntry{C::SpatialPosition, "long time position change", 2, 2},
    RubricEntry{C::SpatialPosition, "relative position", 1, 3},
    RubricEntry{C::Movement, "concrete movement", 1, 1},
    RubricEntry{C::Movement, "generalized behavior", 2, 2},
    RubricEntry{C::Movement, "movement tendency", 2, 2},
    RubricEntry{C::Movement, "social behavior", 2, 2},
    RubricEntry{C::Movement, "multi-person associated action", 2, 2},
    RubricEntry{C::Movement, "action modifier", 1, 1},
    RubricEntry{C::Costume, "color", 1, 2},
    RubricEntry{C::Costume, "style", 1, 2},
    RubricEntry{C::Costume, "modifier", 2, 3},
    RubricEntry{C::HumanAttribute, "gender", 1, 1},
    RubricEntry{C::HumanAttribute, "age", 1, 1},
    RubricEntry{C::HumanAttribute, "manner", 1, 1},
    RubricEntry{C::HumanAttribute, "appearance", 1, 1},
    RubricEntry{C::HumanAttribute, "figure", 1, 1},
    RubricEntry{C::HumanAttribute, "personality", 1, 3},
    RubricEntry{C::HumanAttribute, "mental activity", 1, 3},
    RubricEntry{C::HumanAttribute, "mood", 1, 3},
    // The table lists object usage without a sub-attribute.
    RubricEntry{C::ObjectUsage, "-", 1, 1},
    RubricEntry{C::ObjectAppearance, "color", 1, 2},
    RubricEntry{C::ObjectAppearance, "size", 1, 1},
    RubricEntry{C::SpecificNoun, "direct description", 1, 1},
    RubricEntry{C::SpecificNoun, "figurative description", 2, 2},
    RubricEntry{C::AuxiliaryModifier, "adjective", 1, 1},
    RubricEntry{C::AuxiliaryModifier, "adverb", 1, 1},
    RubricEntry{C::AuxiliaryModifier, "time determiner", 1, 2},
    RubricEntry{C::Others, "interrelation", 2, 3},
    RubricEntry{C::Others, "aim", 2, 4},
    RubricEntry{C::Others, "common sense interpretation", 1, 3},
    RubricEntry{C::Others, "event trend words", 2, 3},
};

constexpr std::array<std::pair<Category, std::string_view>, 9> kCategoryNames{{
    {C::SpatialPosition, "SpatialPosition"},
    {C::Movement, "Movement"},
    {C::Costume, "Costume"},
    {C::HumanAttribute, "HumanAttribute"},
    {C::ObjectUsage, "ObjectUsage"},
    {C::ObjectAppearance, "ObjectAppearance"},
    {C::SpecificNoun, "SpecificNoun"},
    {C::AuxiliaryModifier, "AuxiliaryModifier"},
    {C::Others, "Others"},
}};

std::string describe(const AttributeTag& t) {
  return "(" + std::string(to_string(t.category)) + ", \"" + t.detailed + "\", " +
         std::to_string(t.score) + ")";
}

}  // namespace

std::string_view to_string(Category c) noexcept {
  for (const auto& [cat, name] : kCategoryNames) {
    if (cat == c) return name;
  }
  return "Unknown";
}

std::optional<Category> parse_category(std::string_view name) noexcept {
  for (const auto& [cat, n] : kCategoryNames) {
    if (n == name) return cat;
  }
  return std::nullopt;
}

std::span<const RubricEntry> rulebook() noexcept { return kRulebook; }

std::optional<RubricEntry> lookup(Category category, std::string_view detailed) noexcept {
  for (const auto& e : kRulebook) {
    if (e.category == category && e.detailed == detailed) return e;
  }
  return std::nullopt;
}

Level level_for(int total) {
  if (total < 1) throw ValidationError("difficulty total must be positive");
  if (total == 1) return Level::Easy;
  if (total == 2) return Level::Medium;
  return Level::Hard;
}

DifficultyResult score(std::span<const AttributeTag> tags) {
  if (tags.empty()) throw ValidationError("an instruction needs at least one attribute tag");
  std::set<std::pair<Category, std::string>> keys;
  int total = 0;
  for (const auto& t : tags) {
    const auto entry = lookup(t.category, t.detailed);
    if (!entry) throw ValidationError("unknown attribute " + describe(t));
    if (t.score < entry->min_score || t.score > entry->max_score) {
      throw ValidationError("score out of range for " + describe(t) + ", allowed " +
                            std::to_string(entry->min_score) + "-" +
                            std::to_string(entry->max_score));
    }
    if (!keys.emplace(t.category, t.detailed).second) {
      throw ValidationError("attribute listed twice " + describe(t));
    }
    total += t.score;
  }
  return {total, level_for(total)};
}

std::vector<TaskAttributes> read_attributes(std::string_view text) {
  std::vector<TaskAttributes> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string line(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    const auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError(line_no, "invalid JSON object");
    if (!j.contains("task_id") || !j["task_id"].is_string()) {
      throw ParseError(line_no, "missing string field 'task_id'");
    }
    if (!j.contains("tags") || !j["tags"].is_array()) {
      throw ParseError(line_no, "missing list field 'tags'");
    }
    TaskAttributes task{j["task_id"].get<std::string>(), {}};
    for (const auto& t : j["tags"]) {
      if (!t.is_object() || !t.contains("category") || !t["category"].is_string() ||
          !t.contains("detailed") || !t["detailed"].is_string() ||
          !t.contains("score") || !t["score"].is_number_integer()) {
        throw ParseError(line_no, "tag needs string category, string detailed, integer score");
      }
      const auto cat = parse_category(t["category"].get<std::string>());
      if (!cat) {
        throw ParseError(line_no, "unknown category '" + t["category"].get<std::string>() + "'");
      }
      task.tags.push_back(
          AttributeTag{*cat, t["detailed"].get<std::string>(), t["score"].get<int>()});
    }
    out.push_back(std::move(task));
  }
  return out;
}

std::string write_attributes(std::span<const TaskAttributes> tasks) {
  std::string out;
  for (const auto& task : tasks) {
    json j{{"task_id", task.task_id}, {"tags", json::array()}};
    for (const auto& t : task.tags) {
      j["tags"].push_back(json{{"category", std::string(to_string(t.category))},
                               {"detailed", t.detailed},
                               {"score", t.score}});
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace reamot::difficulty
