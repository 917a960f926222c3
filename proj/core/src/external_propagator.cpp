#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "json.hpp"
#include "reamot/error.hpp"
#include "reamot/propagator.hpp"

using nlohmann::json;

namespace reamot {
namespace {

constexpr int kProtocolVersion = 1;

json box_json(const BoundingBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

std::string sys_error(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

}  // namespace

ExternalPropagator::ExternalPropagator(std::string command,
                                       ExternalPropagatorOptions options)
    : command_(std::move(command)), options_(options) {
  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
    throw ProtocolError(sys_error("socketpair"));
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(sv[0]);
    ::close(sv[1]);
    throw ProtocolError(sys_error("fork"));
  }
  if (pid == 0) {
    // dup2 clears CLOEXEC on the duplicates.
    ::dup2(sv[1], STDIN_FILENO);
    ::dup2(sv[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(sv[1]);
  fd_ = sv[0];
  pid_ = pid;

  try {
    send_line(json{{"op", "hello"}, {"protocol", kProtocolVersion}}.dump());
    const auto reply = read_line(options_.timeout);
    if (!reply) {
      throw ProtocolError("propagator '" + command_ + "' did not answer hello");
    }
    const auto j = json::parse(*reply, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("op", "") != "hello" ||
        j.value("protocol", -1) != kProtocolVersion) {
      throw ProtocolError("propagator '" + command_ + "' sent bad handshake: " +
                          *reply);
    }
  } catch (...) {
    shutdown();
    throw;
  }
}

ExternalPropagator::~ExternalPropagator() { shutdown(); }

void ExternalPropagator::shutdown() noexcept {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  if (pid_ > 0) {
    int status = 0;
    for (int i = 0; i < 100; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) != 0) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

void ExternalPropagator::send_line(const std::string& line) {
  std::string msg = line + '\n';
  std::size_t off = 0;
  while (off < msg.size()) {
    const auto n = ::send(fd_, msg.data() + off, msg.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(sys_error("write to propagator"));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> ExternalPropagator::read_line(
    std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd pfd{fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(sys_error("poll propagator"));
    }
    if (rc == 0) return std::nullopt;
    char chunk[4096];
    const auto n = ::read(fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(sys_error("read from propagator"));
    }
    if (n == 0) throw ProtocolError("propagator '" + command_ + "' closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::optional<BoundingBox> ExternalPropagator::predict(
    const Trajectory& trajectory, FrameIndex,
    const FrameContext& context) {
  // Answers to requests that already timed out arrive first; drop them.
  while (stale_responses_ > 0) {
    if (!read_line(options_.timeout)) break;
    --stale_responses_;
  }

  json request{{"op", "predict"},
               {"track_id", trajectory.track_id},
               {"init_frame", trajectory.first_frame},
               {"init_box", box_json(trajectory.first_box)},
               {"history_frames", json::array()},
               {"current_frame", std::string(context.current)}};
  for (const auto& p : context.history) request["history_frames"].push_back(p);
  send_line(request.dump());

  const auto reply = read_line(options_.timeout);
  if (!reply) {
    ++stale_responses_;
    ++timeouts_;
    return std::nullopt;
  }
  const auto j = json::parse(*reply, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("track_id") ||
      !j["track_id"].is_number_integer() || !j.contains("box")) {
    throw ProtocolError("malformed propagator response: " + *reply);
  }
  if (j["track_id"].get<TrackId>() != trajectory.track_id) {
    throw ProtocolError("propagator answered track " +
                        std::to_string(j["track_id"].get<TrackId>()) +
                        ", expected " + std::to_string(trajectory.track_id));
  }
  const auto& box = j["box"];
  if (box.is_null()) return std::nullopt;
  if (!box.is_array() || box.size() != 4) {
    throw ProtocolError("malformed box in propagator response: " + *reply);
  }
  BoundingBox b;
  for (std::size_t k = 0; k < 4; ++k) {
    if (!box[k].is_number()) {
      throw ProtocolError("malformed box in propagator response: " + *reply);
    }
  }
  b = {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
       box[3].get<double>()};
  if (!b.is_valid()) return std::nullopt;
  return b;
}

}  // namespace reamot
