#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reamot/ingest.hpp"

namespace reamot::difficulty {

enum class Category {
  SpatialPosition,
  Movement,
  Costume,
  HumanAttribute,
  ObjectUsage,
  ObjectAppearance,
  SpecificNoun,
  AuxiliaryModifier,
  Others,
};

std::string_view to_string(Category c) noexcept;
std::optional<Category> parse_category(std::string_view name) noexcept;

struct RubricEntry {
  Category category;
  std::string_view detailed;
  int min_score;
  int max_score;
};

// The attribute scoring table, in table order.
std::span<const RubricEntry> rulebook() noexcept;

std::optional<RubricEntry> lookup(Category category, std::string_view detailed) noexcept;

struct AttributeTag {
  Category category = Category::Others;
  std::string detailed;
  int score = 0;
};

struct DifficultyResult {
  int total = 0;
  Level level = Level::Easy;
};

// Total 1 is Easy, 2 Medium, 3 and above Hard.
Level level_for(int total);

// Validates every tag against the rulebook and sums the scores. Rejects an
// empty list, unknown (category, detailed) keys, out-of-range scores and the
// same key twice.
DifficultyResult score(std::span<const AttributeTag> tags);

struct TaskAttributes {
  std::string task_id;
  std::vector<AttributeTag> tags;
};

// One JSON object per line:
// {"task_id": "...", "tags": [{"category": "...", "detailed": "...", "score": n}]}
std::vector<TaskAttributes> read_attributes(std::string_view text);
std::string write_attributes(std::span<const TaskAttributes> tasks);

}  // namespace reamot::difficulty
