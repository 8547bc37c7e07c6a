#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <mutex>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

#include "ald/tools/runner.hpp"

extern char** environ;

namespace ald::tools {
namespace {

struct Pipe {
    int fd[2] = {-1, -1};

    Pipe()
    {
        if (::pipe2(fd, O_CLOEXEC) != 0) throw ToolError(ToolErrorKind::spawn_failure, std::strerror(errno));
    }
    ~Pipe()
    {
        close_read();
        close_write();
    }
    void close_read()
    {
        if (fd[0] >= 0) ::close(fd[0]);
        fd[0] = -1;
    }
    void close_write()
    {
        if (fd[1] >= 0) ::close(fd[1]);
        fd[1] = -1;
    }
};

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

int decode_status(int status)
{
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
    return 255;
}

std::vector<std::string> child_environment(const std::vector<std::string>& scrub)
{
    std::vector<std::string> env;
    for (char** e = environ; e && *e; ++e) {
        std::string_view entry(*e);
        auto name = entry.substr(0, entry.find('='));
        bool drop = false;
        for (const auto& s : scrub) drop = drop || name == s;
        if (!drop) env.emplace_back(entry);
    }
    return env;
}

} // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const std::string& stdin_data, int timeout_ms,
                          const std::vector<std::string>& scrub)
{
    if (argv.empty()) throw ToolError(ToolErrorKind::spawn_failure, "empty command");
    static std::once_flag sigpipe_once;
    std::call_once(sigpipe_once, [] { std::signal(SIGPIPE, SIG_IGN); });

    Pipe in, out, err;
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in.fd[0], 0);
    posix_spawn_file_actions_adddup2(&actions, out.fd[1], 1);
    posix_spawn_file_actions_adddup2(&actions, err.fd[1], 2);
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);

    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    std::vector<std::string> env = child_environment(scrub);
    std::vector<char*> envp;
    for (auto& e : env) envp.push_back(e.data());
    envp.push_back(nullptr);

    auto start = std::chrono::steady_clock::now();
    pid_t pid = 0;
    int rc = posix_spawnp(&pid, argv[0].c_str(), &actions, &attr, args.data(), envp.data());
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    if (rc != 0) throw ToolError(ToolErrorKind::spawn_failure, "cannot run " + argv[0] + ": " + std::strerror(rc));

    in.close_read();
    out.close_write();
    err.close_write();
    set_nonblocking(in.fd[1]);
    set_nonblocking(out.fd[0]);
    set_nonblocking(err.fd[0]);
    if (stdin_data.empty()) in.close_write();

    ProcessResult result;
    auto deadline = start + std::chrono::milliseconds(timeout_ms);
    std::size_t written = 0;
    char buf[65536];

    while (out.fd[0] >= 0 || err.fd[0] >= 0) {
        auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            result.timed_out = true;
            break;
        }
        pollfd fds[3];
        int n = 0;
        if (out.fd[0] >= 0) fds[n++] = {out.fd[0], POLLIN, 0};
        if (err.fd[0] >= 0) fds[n++] = {err.fd[0], POLLIN, 0};
        if (in.fd[1] >= 0) fds[n++] = {in.fd[1], POLLOUT, 0};
        auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        int ready = ::poll(fds, static_cast<nfds_t>(n), static_cast<int>(wait) + 1);
        if (ready < 0 && errno != EINTR) break;
        for (int i = 0; i < n; ++i) {
            if (fds[i].revents == 0) continue;
            if (fds[i].fd == in.fd[1]) {
                ssize_t w = ::write(in.fd[1], stdin_data.data() + written, stdin_data.size() - written);
                if (w > 0) written += static_cast<std::size_t>(w);
                if (w < 0 && errno != EAGAIN) written = stdin_data.size();
                if (written == stdin_data.size()) in.close_write();
                continue;
            }
            Pipe& p = fds[i].fd == out.fd[0] ? out : err;
            std::string& sink = &p == &out ? result.out : result.err;
            ssize_t r = ::read(p.fd[0], buf, sizeof buf);
            if (r > 0)
                sink.append(buf, static_cast<std::size_t>(r));
            else if (r == 0 || errno != EAGAIN)
                p.close_read();
        }
    }
    in.close_write();

    int status = 0;
    if (!result.timed_out) {
        // Output is closed; give the process the rest of the budget to exit.
        while (true) {
            pid_t w = ::waitpid(pid, &status, WNOHANG);
            if (w == pid) break;
            if (w < 0 && errno != EINTR) break;
            if (std::chrono::steady_clock::now() >= deadline) {
                result.timed_out = true;
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
        }
    }
    if (result.timed_out) {
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        result.exit_code = -1;
    } else {
        result.exit_code = decode_status(status);
    }
    result.duration_ms = static_cast<long>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count());
    return result;
}

} // namespace ald::tools
