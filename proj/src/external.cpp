#include "wilddistort/external.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <thread>

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "wilddistort/codec.hpp"
#include "wilddistort/error.hpp"

extern char** environ;

namespace wilddistort {

namespace {

struct Pipe {
  int fd[2]{-1, -1};
  Pipe() {
    if (::pipe(fd) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (fd[0] >= 0) ::close(fd[0]);
    fd[0] = -1;
  }
  void close_write() {
    if (fd[1] >= 0) ::close(fd[1]);
    fd[1] = -1;
  }
};

void write_all(int fd, const std::vector<std::uint8_t>& data) {
  // A child that exits early must not take this process down with SIGPIPE.
  sigset_t block;
  sigemptyset(&block);
  sigaddset(&block, SIGPIPE);
  pthread_sigmask(SIG_BLOCK, &block, nullptr);
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    off += static_cast<std::size_t>(n);
  }
  ::close(fd);
  timespec zero{0, 0};
  sigtimedwait(&block, nullptr, &zero);
}

}  // namespace

std::vector<std::uint8_t> run_filter_process(const std::vector<std::string>& argv,
                                             const std::vector<std::uint8_t>& input) {
  if (argv.empty()) throw ConfigError("external transform: empty command");
  Pipe in;
  Pipe out;

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in.fd[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out.fd[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, in.fd[1]);
  posix_spawn_file_actions_addclose(&actions, out.fd[0]);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw Error("external transform '" + argv[0] + "': " + std::strerror(rc));
  in.close_read();
  out.close_write();

  const int write_fd = in.fd[1];
  in.fd[1] = -1;
  std::thread writer(write_all, write_fd, std::cref(input));

  std::vector<std::uint8_t> result;
  std::uint8_t buf[65536];
  for (;;) {
    const ssize_t n = ::read(out.fd[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    result.insert(result.end(), buf, buf + n);
  }
  writer.join();

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw Error("external transform '" + argv[0] + "' failed with status " + std::to_string(status));
  }
  return result;
}

void ExternalTransformRegistry::add(const std::string& name, std::vector<std::string> argv) {
  if (name.empty()) throw ConfigError("external transform: empty name");
  if (argv.empty() || argv[0].empty()) throw ConfigError("external transform '" + name + "': empty command");
  commands_[name] = std::move(argv);
}

bool ExternalTransformRegistry::contains(const std::string& name) const { return commands_.count(name) != 0; }

std::vector<std::string> ExternalTransformRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : commands_) out.push_back(k);
  return out;
}

ImageBuffer ExternalTransformRegistry::apply(const std::string& name, const ImageBuffer& img) const {
  const auto it = commands_.find(name);
  if (it == commands_.end()) throw ConfigError("unknown external transform '" + name + "'");
  const auto output = run_filter_process(it->second, encode_png(img));
  try {
    return decode_image(output);
  } catch (const Error& e) {
    throw Error("external transform '" + name + "' produced undecodable output: " + e.what());
  }
}

}  // namespace wilddistort
