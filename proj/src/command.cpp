#include "command.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

namespace wlmbridge {

namespace {

void close_fd(int& fd) {
    if (fd >= 0) {
        ::close(fd);
        fd = -1;
    }
}

std::int64_t steady_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
}

} // namespace

CommandResult run_command(const std::vector<std::string>& argv, int timeout_ms) {
    CommandResult result;
    if (argv.empty()) {
        result.spawn_failed = true;
        return result;
    }

    int out_pipe[2] = {-1, -1};
    int err_pipe[2] = {-1, -1};
    if (::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0) {
        close_fd(out_pipe[0]);
        close_fd(out_pipe[1]);
        result.spawn_failed = true;
        return result;
    }

    pid_t pid = ::fork();
    if (pid < 0) {
        close_fd(out_pipe[0]);
        close_fd(out_pipe[1]);
        close_fd(err_pipe[0]);
        close_fd(err_pipe[1]);
        result.spawn_failed = true;
        return result;
    }

    if (pid == 0) {
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(err_pipe[1], STDERR_FILENO);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        ::close(err_pipe[0]);
        ::close(err_pipe[1]);
        std::vector<char*> args;
        args.reserve(argv.size() + 1);
        for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        ::execvp(args[0], args.data());
        ::_exit(127);
    }

    close_fd(out_pipe[1]);
    close_fd(err_pipe[1]);

    const std::int64_t deadline = steady_ms() + timeout_ms;
    bool out_open = true;
    bool err_open = true;
    char buf[4096];

    while (out_open || err_open) {
        std::int64_t remaining = deadline - steady_ms();
        if (remaining <= 0) {
            result.timed_out = true;
            ::kill(pid, SIGKILL);
            break;
        }
        struct pollfd fds[2];
        nfds_t nfds = 0;
        if (out_open) fds[nfds++] = {out_pipe[0], POLLIN, 0};
        if (err_open) fds[nfds++] = {err_pipe[0], POLLIN, 0};
        int rc = ::poll(fds, nfds, static_cast<int>(std::min<std::int64_t>(remaining, 200)));
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (nfds_t i = 0; i < nfds; ++i) {
            if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            ssize_t n = ::read(fds[i].fd, buf, sizeof(buf));
            bool is_out = fds[i].fd == out_pipe[0];
            if (n > 0) {
                (is_out ? result.out : result.err).append(buf, static_cast<std::size_t>(n));
            } else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EINTR)) {
                if (is_out) {
                    close_fd(out_pipe[0]);
                    out_open = false;
                } else {
                    close_fd(err_pipe[0]);
                    err_open = false;
                }
            }
        }
    }

    close_fd(out_pipe[0]);
    close_fd(err_pipe[0]);

    int status = 0;
    if (::waitpid(pid, &status, 0) == pid && !result.timed_out) {
        if (WIFEXITED(status)) {
            result.exit_code = WEXITSTATUS(status);
            if (result.exit_code == 127 && result.out.empty() && result.err.empty())
                result.spawn_failed = true;
        }
    }
    return result;
}

} // namespace wlmbridge
