#include "pavoc/external_predictor.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "pavoc/byte_io.hpp"
#include "pavoc/errors.hpp"
#include "pavoc/wire_protocol.hpp"

extern char** environ;

namespace pavoc {
namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe() {
  static const bool once = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)once;
}

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

ExternalPredictor::ExternalPredictor(std::string command, ExternalPredictorOptions options)
    : command_(std::move(command)), options_(options) {
  ignore_sigpipe();
  int in_pipe[2];   // parent -> child stdin
  int out_pipe[2];  // child stdout -> parent
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw PredictorUnavailable("pipe: " + std::string(std::strerror(errno)));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw PredictorUnavailable("pipe: " + std::string(std::strerror(errno)));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

  std::string sh = "sh", dash_c = "-c";
  char* argv[] = {sh.data(), dash_c.data(), command_.data(), nullptr};
  // Own process group so shutdown also reaches anything the shell started.
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);
  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, &attr, argv, environ);
  posix_spawnattr_destroy(&attr);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  if (rc != 0) {
    close_fd(to_child_);
    close_fd(from_child_);
    throw PredictorUnavailable("cannot start predictor '" + command_ + "': " + std::strerror(rc));
  }
  pid_ = pid;

  try {
    write_all(wire::encode_handshake());
    const auto reply = read_exact(8, Clock::now() + options_.timeout);
    server_version_ = wire::decode_handshake_reply(reply);
    if (server_version_ != wire::kProtocolVersion)
      throw ProtocolError("predictor speaks protocol version " + std::to_string(server_version_));
  } catch (...) {
    shutdown();
    throw;
  }
}

ExternalPredictor::~ExternalPredictor() { shutdown(); }

void ExternalPredictor::shutdown() {
  close_fd(to_child_);
  close_fd(from_child_);
  if (pid_ > 0) {
    // Give the child a moment to exit on EOF, then clear out its group. The
    // leader stays unreaped until then so the group id cannot be reused.
    for (int i = 0; i < 50; ++i) {
      siginfo_t info{};
      if (::waitid(P_PID, static_cast<id_t>(pid_), &info, WEXITED | WNOHANG | WNOWAIT) == 0 && info.si_pid == pid_) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    ::kill(-pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

void ExternalPredictor::fail_unavailable(const std::string& why) {
  broken_ = true;
  throw PredictorUnavailable("predictor '" + command_ + "': " + why);
}

void ExternalPredictor::write_all(std::span<const std::uint8_t> bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::write(to_child_, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail_unavailable(errno == EPIPE ? "process closed its input" : std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

std::vector<std::uint8_t> ExternalPredictor::read_exact(std::size_t n, Clock::time_point deadline) {
  std::vector<std::uint8_t> buffer(n);
  std::size_t done = 0;
  while (done < n) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (left <= 0) fail_unavailable("timed out waiting for a response");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left, 1 << 30)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      fail_unavailable(std::strerror(errno));
    }
    if (ready == 0) continue;
    const ssize_t got = ::read(from_child_, buffer.data() + done, n - done);
    if (got < 0) {
      if (errno == EINTR) continue;
      fail_unavailable(std::strerror(errno));
    }
    if (got == 0) fail_unavailable("process exited");
    done += static_cast<std::size_t>(got);
  }
  return buffer;
}

std::vector<double> ExternalPredictor::predict(const PredictorRequest& request) {
  std::lock_guard lock(mutex_);
  if (broken_ || pid_ <= 0) throw PredictorUnavailable("predictor '" + command_ + "' is no longer usable");

  const auto frame = wire::encode_request(wire::make_request(request.y_t, request.mel, request.noise_level, options_.log_mel));
  write_all(frame);

  const auto deadline = Clock::now() + options_.timeout;
  const auto header = read_exact(8, deadline);
  ByteReader<ProtocolError> reader(header);
  const std::string magic = reader.magic();
  if (magic != wire::kResponseMagic) {
    broken_ = true;
    throw ProtocolError("predictor '" + command_ + "' sent magic '" + magic + "', expected ERS1");
  }
  const std::uint32_t count = reader.u32();
  if (count != request.y_t.size()) {
    broken_ = true;
    throw ContractViolation("predictor returned " + std::to_string(count) + " samples for a request of " +
                            std::to_string(request.y_t.size()));
  }
  const auto payload = read_exact(static_cast<std::size_t>(count) * 4, deadline);
  ByteReader<ProtocolError> values(payload);
  std::vector<double> eps(count);
  for (auto& v : eps) v = values.f32();
  return eps;
}

std::vector<double> external_predict(const PredictorRequest& request, ExternalPredictor& endpoint) {
  return endpoint.predict(request);
}

}  // namespace pavoc
