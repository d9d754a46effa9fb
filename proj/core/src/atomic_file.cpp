#include "atomic_file.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <string>

#include "promptassist/error.hpp"

namespace promptassist::detail {

namespace {

[[noreturn]] void fail(const std::string& what, int err) {
    auto code = err == ENOSPC || err == EDQUOT ? ErrorCode::StorageFull : ErrorCode::IoError;
    throw Error(code, what + ": " + std::strerror(err));
}

class Fd {
public:
    explicit Fd(int fd) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() {
        if (fd_ >= 0) ::close(fd_);
    }
    [[nodiscard]] int get() const { return fd_; }
    int release() {
        int fd = fd_;
        fd_ = -1;
        return fd;
    }

private:
    int fd_;
};

}  // namespace

void write_file_atomically(const std::filesystem::path& path, std::string_view contents,
                           const std::function<void()>& before_rename) {
    auto tmp = path;
    tmp += ".tmp";
    Fd fd(::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644));
    if (fd.get() < 0) fail("cannot create " + tmp.string(), errno);

    auto cleanup = [&] {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
    };

    const char* data = contents.data();
    std::size_t left = contents.size();
    while (left > 0) {
        auto n = ::write(fd.get(), data, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            int err = errno;
            cleanup();
            fail("cannot write " + tmp.string(), err);
        }
        data += n;
        left -= static_cast<std::size_t>(n);
    }
    if (::fsync(fd.get()) != 0) {
        int err = errno;
        cleanup();
        fail("cannot sync " + tmp.string(), err);
    }
    if (::close(fd.release()) != 0) {
        int err = errno;
        cleanup();
        fail("cannot close " + tmp.string(), err);
    }

    if (before_rename) {
        try {
            before_rename();
        } catch (...) {
            cleanup();
            throw;
        }
    }

    if (::rename(tmp.c_str(), path.c_str()) != 0) {
        int err = errno;
        cleanup();
        fail("cannot rename onto " + path.string(), err);
    }
}

}  // namespace promptassist::detail
