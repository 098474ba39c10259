// Copyright 2026 The spatrwd Authors.
// SPDX-License-Identifier: Apache-2.0

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <httplib.h>

#include "spatrwd/error.hpp"
#include "spatrwd/protocol.hpp"

namespace spatrwd {
namespace {

[[noreturn]] void Unavailable(const std::string& what) {
  throw Error(ErrorKind::kBackendUnavailable, what);
}

bool WriteAll(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

// Request equality for replay: same method and params, id ignored.
bool SameRequest(const std::string& recorded, const std::string& live) {
  try {
    const Request a = DecodeRequest(recorded);
    const Request b = DecodeRequest(live);
    return a.method == b.method && a.params == b.params;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

LoopbackTransport::LoopbackTransport(Handler handler, std::string description)
    : handler_(std::move(handler)), description_(std::move(description)) {}

std::string LoopbackTransport::RoundTrip(const std::string& request_line, std::string_view) {
  return handler_(request_line);
}

// ---------------------------------------------------------------------------

ChildProcessTransport::ChildProcessTransport(std::string command) : command_(std::move(command)) {}

ChildProcessTransport::~ChildProcessTransport() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
}

void ChildProcessTransport::Start() {
  // A dead child must surface as an error, not kill us.
  ::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0) Unavailable("pipe: " + std::string(std::strerror(errno)));
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    Unavailable("pipe: " + std::string(std::strerror(errno)));
  }
  const pid_t pid = ::fork();
  if (pid < 0) Unavailable("fork: " + std::string(std::strerror(errno)));
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

std::string ChildProcessTransport::RoundTrip(const std::string& request_line, std::string_view) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (pid_ < 0) Start();
  if (!WriteAll(to_child_, request_line) || !WriteAll(to_child_, "\n")) {
    Unavailable("backend process `" + command_ + "` is not accepting input");
  }
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (line.empty()) continue;
      return line;
    }
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) Unavailable("backend process `" + command_ + "` closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

// ---------------------------------------------------------------------------

HttpTransport::HttpTransport(std::string base_url, int timeout_seconds)
    : base_url_(std::move(base_url)), timeout_seconds_(timeout_seconds) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::string HttpTransport::RoundTrip(const std::string& request_line, std::string_view method) {
  httplib::Client client(base_url_);
  client.set_connection_timeout(timeout_seconds_, 0);
  client.set_read_timeout(timeout_seconds_, 0);
  client.set_write_timeout(timeout_seconds_, 0);
  auto result = client.Post(MethodPath(method), request_line, "application/json");
  if (!result) {
    Unavailable("POST " + base_url_ + MethodPath(method) + ": " + httplib::to_string(result.error()));
  }
  // Error envelopes may come back with a non-2xx status; the body still
  // carries the protocol reply.
  if (result->body.empty()) {
    Unavailable("POST " + base_url_ + MethodPath(method) + ": HTTP " +
                std::to_string(result->status) + " with empty body");
  }
  return result->body;
}

// ---------------------------------------------------------------------------

ReplayTransport::ReplayTransport(std::vector<std::string> requests,
                                 std::vector<std::string> responses)
    : requests_(std::move(requests)), responses_(std::move(responses)) {
  if (requests_.size() != responses_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "transcript has " + std::to_string(requests_.size()) +
                                                 " requests but " + std::to_string(responses_.size()) +
                                                 " responses");
  }
}

std::shared_ptr<ReplayTransport> ReplayTransport::FromFiles(const std::string& request_file,
                                                            const std::string& response_file) {
  return std::make_shared<ReplayTransport>(ReadLines(request_file), ReadLines(response_file));
}

std::string ReplayTransport::RoundTrip(const std::string& request_line, std::string_view method) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (next_ >= requests_.size()) {
    Unavailable("replay transcript exhausted at method " + std::string(method));
  }
  if (!SameRequest(requests_[next_], request_line)) {
    Unavailable("replay mismatch at line " + std::to_string(next_ + 1) + ": expected " +
                requests_[next_] + ", got " + request_line);
  }
  const std::string live_id = DecodeRequest(request_line).id;
  Json reply;
  try {
    reply = Json::parse(responses_[next_]);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::kMalformedResponse, std::string("$: invalid JSON: ") + e.what());
  }
  ++next_;
  if (reply.is_object()) reply["id"] = live_id;
  return reply.dump();
}

std::size_t ReplayTransport::remaining() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return requests_.size() - next_;
}

}  // namespace spatrwd
