#include "reamot/propagator.hpp"

#include <iterator>

#include "reamot/error.hpp"

namespace reamot {

std::optional<BoundingBox> ConstantVelocityPropagator::predict(
    const Trajectory& trajectory, FrameIndex current_frame,
    const FrameContext&) {
  const auto& committed = trajectory.committed;
  if (committed.size() < 2) return trajectory.last_matched_box;

  const auto last = std::prev(committed.end());
  const auto before = std::prev(last);
  const auto gap = static_cast<double>(last->first - before->first);
  const auto& a = before->second;
  const auto& b = last->second;
  const double vx = ((b.x1 - a.x1) + (b.x2 - a.x2)) / (2.0 * gap);
  const double vy = ((b.y1 - a.y1) + (b.y2 - a.y2)) / (2.0 * gap);
  const auto steps = static_cast<double>(current_frame - last->first);
  return b.translated(vx * steps, vy * steps);
}

std::unique_ptr<Propagator> make_propagator(std::string_view spec,
                                            ExternalPropagatorOptions options) {
  if (spec == "persist" || spec == "persistence") {
    return std::make_unique<PersistencePropagator>();
  }
  if (spec == "velocity" || spec == "constant_velocity") {
    return std::make_unique<ConstantVelocityPropagator>();
  }
  constexpr std::string_view kExtern = "extern:";
  if (spec.substr(0, kExtern.size()) == kExtern) {
    auto command = std::string(spec.substr(kExtern.size()));
    if (command.empty()) throw ValidationError("extern propagator needs a command");
    return std::make_unique<ExternalPropagator>(std::move(command), options);
  }
  throw ValidationError("unknown propagator '" + std::string(spec) +
                        "' (expected persist, velocity or extern:<command>)");
}

}  // namespace reamot
