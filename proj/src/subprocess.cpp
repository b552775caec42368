#include "mlens/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "mlens/errors.hpp"

extern char** environ;

namespace mlens {

namespace {

void set_cloexec(int fd) { ::fcntl(fd, F_SETFD, FD_CLOEXEC); }

[[noreturn]] void throw_errno(const std::string& what) {
  throw IoFailure(what + ": " + std::strerror(errno));
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& opts) {
  if (argv.empty()) {
    throw IoFailure("run_process: empty argv");
  }

  // A child that exits early must not kill us via SIGPIPE on stdin writes.
  static const bool sigpipe_ignored = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)sigpipe_ignored;

  int in_pipe[2];
  int out_pipe[2];
  int err_pipe[2];
  if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0) {
    throw_errno("pipe");
  }

  // Merge environment overrides with the inherited environment.
  std::map<std::string, std::string> env_map;
  for (char** e = environ; *e != nullptr; ++e) {
    std::string entry(*e);
    auto eq = entry.find('=');
    if (eq != std::string::npos) {
      env_map[entry.substr(0, eq)] = entry.substr(eq + 1);
    }
  }
  for (const auto& [k, v] : opts.env) {
    env_map[k] = v;
  }
  std::vector<std::string> env_storage;
  env_storage.reserve(env_map.size());
  for (const auto& [k, v] : env_map) {
    env_storage.push_back(k + "=" + v);
  }
  std::vector<char*> envp;
  envp.reserve(env_storage.size() + 1);
  for (auto& s : env_storage) {
    envp.push_back(s.data());
  }
  envp.push_back(nullptr);

  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& a : argv) {
    cargv.push_back(const_cast<char*>(a.c_str()));
  }
  cargv.push_back(nullptr);

  pid_t pid = ::fork();
  if (pid < 0) {
    throw_errno("fork");
  }

  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[0]);
    ::close(err_pipe[1]);
    if (opts.cwd && ::chdir(opts.cwd->c_str()) != 0) {
      ::_exit(127);
    }
    ::execvpe(cargv[0], cargv.data(), envp.data());
    ::_exit(127);
  }

  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  set_cloexec(in_pipe[1]);
  set_cloexec(out_pipe[0]);
  set_cloexec(err_pipe[0]);

  const std::string stdin_data = opts.stdin_data.value_or(std::string());
  std::size_t written = 0;
  int stdin_fd = in_pipe[1];
  if (stdin_data.empty()) {
    ::close(stdin_fd);
    stdin_fd = -1;
  }

  ProcessResult result;
  int out_fd = out_pipe[0];
  int err_fd = err_pipe[0];
  char buf[65536];

  // Interleave writes and reads so neither pipe can deadlock.
  while (out_fd >= 0 || err_fd >= 0 || stdin_fd >= 0) {
    struct pollfd fds[3];
    nfds_t nfds = 0;
    int out_slot = -1;
    int err_slot = -1;
    int in_slot = -1;
    if (out_fd >= 0) {
      out_slot = static_cast<int>(nfds);
      fds[nfds++] = {out_fd, POLLIN, 0};
    }
    if (err_fd >= 0) {
      err_slot = static_cast<int>(nfds);
      fds[nfds++] = {err_fd, POLLIN, 0};
    }
    if (stdin_fd >= 0) {
      in_slot = static_cast<int>(nfds);
      fds[nfds++] = {stdin_fd, POLLOUT, 0};
    }
    if (::poll(fds, nfds, -1) < 0) {
      if (errno == EINTR) {
        continue;
      }
      throw_errno("poll");
    }
    if (out_slot >= 0 && (fds[out_slot].revents & (POLLIN | POLLHUP))) {
      ssize_t n = ::read(out_fd, buf, sizeof(buf));
      if (n > 0) {
        result.out.append(buf, static_cast<std::size_t>(n));
      } else {
        ::close(out_fd);
        out_fd = -1;
      }
    }
    if (err_slot >= 0 && (fds[err_slot].revents & (POLLIN | POLLHUP))) {
      ssize_t n = ::read(err_fd, buf, sizeof(buf));
      if (n > 0) {
        result.err.append(buf, static_cast<std::size_t>(n));
      } else {
        ::close(err_fd);
        err_fd = -1;
      }
    }
    if (in_slot >= 0 && (fds[in_slot].revents & (POLLOUT | POLLERR | POLLHUP))) {
      if (fds[in_slot].revents & (POLLERR | POLLHUP)) {
        ::close(stdin_fd);
        stdin_fd = -1;
      } else {
        ssize_t n = ::write(stdin_fd, stdin_data.data() + written, stdin_data.size() - written);
        if (n > 0) {
          written += static_cast<std::size_t>(n);
        }
        if (n < 0 || written == stdin_data.size()) {
          ::close(stdin_fd);
          stdin_fd = -1;
        }
      }
    }
  }

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) {
      throw_errno("waitpid");
    }
  }
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  return result;
}

}  // namespace mlens
