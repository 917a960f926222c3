#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "reamot/geometry.hpp"
#include "reamot/trajectory.hpp"

namespace reamot {

// Frames a propagator may look at: those inside the trajectory's lifetime
// before the current frame, plus the current frame. Empty when the tracker
// runs without a frame listing.
struct FrameContext {
  std::span<const std::string> history;
  std::string_view current;
};

// Predicts where a live trajectory sits in the current frame. Must not mutate
// the trajectory; returning nullopt makes the tracker fall back to the
// trajectory's last matched box.
class Propagator {
 public:
  virtual ~Propagator() = default;

  virtual std::string id() const = 0;
  virtual std::optional<BoundingBox> predict(const Trajectory& trajectory,
                                             FrameIndex current_frame,
                                             const FrameContext& context) = 0;
};

class PersistencePropagator final : public Propagator {
 public:
  std::string id() const override { return "persist"; }
  std::optional<BoundingBox> predict(const Trajectory& trajectory, FrameIndex,
                                     const FrameContext&) override {
    return trajectory.last_matched_box;
  }
};

// Moves the last committed box by the mean per-frame displacement between the
// last two committed boxes. Falls back to persistence with a single box.
class ConstantVelocityPropagator final : public Propagator {
 public:
  std::string id() const override { return "velocity"; }
  std::optional<BoundingBox> predict(const Trajectory& trajectory,
                                     FrameIndex current_frame,
                                     const FrameContext& context) override;
};

struct ExternalPropagatorOptions {
  std::chrono::milliseconds timeout{5000};
};

// Talks to a child process over its stdin/stdout with one JSON object per
// line. See README for the message shapes.
class ExternalPropagator final : public Propagator {
 public:
  explicit ExternalPropagator(std::string command,
                              ExternalPropagatorOptions options = {});
  ~ExternalPropagator() override;

  ExternalPropagator(const ExternalPropagator&) = delete;
  ExternalPropagator& operator=(const ExternalPropagator&) = delete;

  std::string id() const override { return "extern:" + command_; }
  std::optional<BoundingBox> predict(const Trajectory& trajectory,
                                     FrameIndex current_frame,
                                     const FrameContext& context) override;

  // Requests that fell back because the child did not answer in time.
  std::size_t timeouts() const noexcept { return timeouts_; }

 private:
  void send_line(const std::string& line);
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);
  void shutdown() noexcept;

  std::string command_;
  ExternalPropagatorOptions options_;
  int fd_ = -1;
  int pid_ = -1;
  std::string buffer_;
  std::size_t stale_responses_ = 0;
  std::size_t timeouts_ = 0;
};

// "persist" | "velocity" | "extern:<shell command>"
std::unique_ptr<Propagator> make_propagator(std::string_view spec,
                                            ExternalPropagatorOptions options = {});

}  // namespace reamot
