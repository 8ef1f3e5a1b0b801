#pragma once

#include <algorithm>
#include <chrono>
#include <csignal>
#include <cstring>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace rtlopt {

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  bool spawn_failed = false;
  std::string output; // stdout + stderr, interleaved
};

// Runs argv with a hard deadline; the child is killed on timeout. Output is
// capped to keep a runaway tool from exhausting memory.
inline ProcessResult run_process(const std::vector<std::string>& argv, int timeout_s,
                                 std::size_t max_output = 4 * 1024 * 1024)
{
  ProcessResult result;
  if (argv.empty()) {
    result.spawn_failed = true;
    return result;
  }

  int fds[2];
  if (pipe(fds) != 0) {
    result.spawn_failed = true;
    return result;
  }

  pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    result.spawn_failed = true;
    return result;
  }

  if (pid == 0) {
    close(fds[0]);
    dup2(fds[1], STDOUT_FILENO);
    dup2(fds[1], STDERR_FILENO);
    close(fds[1]);
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }

  close(fds[1]);
  fcntl(fds[0], F_SETFL, O_NONBLOCK);

  auto started = std::chrono::steady_clock::now();
  auto deadline = started + std::chrono::seconds(timeout_s);
  bool open = true;
  char buf[4096];
  while (open) {
    struct pollfd pfd = {fds[0], POLLIN, 0};
    int rc = poll(&pfd, 1, 200);
    if (rc > 0) {
      for (;;) {
        ssize_t n = read(fds[0], buf, sizeof(buf));
        if (n > 0) {
          if (result.output.size() < max_output)
            result.output.append(buf, buf + std::min<std::size_t>(
                                               static_cast<std::size_t>(n),
                                               max_output - result.output.size()));
        } else if (n == 0) {
          open = false;
          break;
        } else {
          break; // EAGAIN
        }
      }
    }
    if (open && std::chrono::steady_clock::now() >= deadline) {
      kill(pid, SIGKILL);
      result.timed_out = true;
      open = false;
    }
  }
  close(fds[0]);

  int status = 0;
  waitpid(pid, &status, 0);
  if (!result.timed_out) {
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    else result.exit_code = -1;
  }
  return result;
}

// Convenience wrapper: run a shell command line.
inline ProcessResult run_shell(const std::string& command, int timeout_s,
                               std::size_t max_output = 4 * 1024 * 1024)
{
  return run_process({"/bin/sh", "-c", command}, timeout_s, max_output);
}

} // namespace rtlopt
