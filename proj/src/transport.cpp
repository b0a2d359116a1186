#include "aggen/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>

#include "aggen/errors.hpp"

namespace aggen {

namespace {

constexpr std::chrono::seconds kRecvDeadline(180);
constexpr std::chrono::seconds kConnectDeadline(30);
constexpr std::uint64_t kMaxFrameBytes = 1ULL << 40;

} // namespace

// ---------------------------------------------------------------------------
// In-memory mesh

class MemoryEndpoint : public Transport {
public:
    MemoryEndpoint(MemoryMesh& mesh, int rank) : mesh_(mesh), rank_(rank) {}

    int rank() const override { return rank_; }
    int comm_sz() const override { return mesh_.comm_sz_; }

    void send(int dst, std::vector<std::uint8_t> payload) override {
        if (dst < 0 || dst >= mesh_.comm_sz_ || dst == rank_) {
            throw TransportError("invalid send destination rank " + std::to_string(dst));
        }
        {
            std::lock_guard<std::mutex> lock(mesh_.log_mutex_);
            std::string magic(reinterpret_cast<const char*>(payload.data()),
                              std::min<std::size_t>(4, payload.size()));
            mesh_.log_.push_back({rank_, dst, payload.size(), std::move(magic)});
        }
        MemoryMesh::Channel& ch = mesh_.channel(rank_, dst);
        std::lock_guard<std::mutex> lock(ch.mutex);
        ch.queue.push_back(std::move(payload));
        ch.cv.notify_one();
    }

    std::vector<std::uint8_t> recv(int src) override {
        if (src < 0 || src >= mesh_.comm_sz_ || src == rank_) {
            throw TransportError("invalid recv source rank " + std::to_string(src));
        }
        MemoryMesh::Channel& ch = mesh_.channel(src, rank_);
        std::unique_lock<std::mutex> lock(ch.mutex);
        if (!ch.cv.wait_for(lock, kRecvDeadline, [&ch] { return !ch.queue.empty(); })) {
            throw TransportError("timed out waiting for message from rank " + std::to_string(src));
        }
        std::vector<std::uint8_t> payload = std::move(ch.queue.front());
        ch.queue.pop_front();
        return payload;
    }

private:
    MemoryMesh& mesh_;
    int rank_;
};

MemoryMesh::MemoryMesh(int comm_sz)
    : comm_sz_(comm_sz), channels_(static_cast<std::size_t>(comm_sz) * comm_sz) {}

MemoryMesh::~MemoryMesh() = default;

std::unique_ptr<Transport> MemoryMesh::endpoint(int rank) {
    if (rank < 0 || rank >= comm_sz_) {
        throw TransportError("endpoint rank out of range");
    }
    return std::make_unique<MemoryEndpoint>(*this, rank);
}

std::vector<MemoryMesh::Record> MemoryMesh::log() const {
    std::lock_guard<std::mutex> lock(log_mutex_);
    return log_;
}

// ---------------------------------------------------------------------------
// Endpoint table

std::string EndpointTable::to_flag() const {
    std::string out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i) out += ',';
        out += entries[i].host + ":" + std::to_string(entries[i].port);
    }
    return out;
}

EndpointTable EndpointTable::from_flag(const std::string& flag) {
    EndpointTable table;
    std::string cur;
    auto flush = [&]() {
        auto colon = cur.rfind(':');
        if (colon == std::string::npos) {
            throw TransportError("malformed endpoint entry '" + cur + "' (expected host:port)");
        }
        int port = std::stoi(cur.substr(colon + 1));
        if (port <= 0 || port > 65535) {
            throw TransportError("endpoint port out of range in '" + cur + "'");
        }
        table.entries.push_back({cur.substr(0, colon), static_cast<std::uint16_t>(port)});
        cur.clear();
    };
    for (char c : flag) {
        if (c == ',') flush();
        else cur += c;
    }
    if (!cur.empty()) flush();
    return table;
}

// ---------------------------------------------------------------------------
// Loopback sockets

namespace {

void write_all(int fd, const void* data, std::size_t n) {
    const char* p = static_cast<const char*>(data);
    while (n > 0) {
        ssize_t written = ::write(fd, p, n);
        if (written < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("socket write failed: ") + std::strerror(errno));
        }
        p += written;
        n -= static_cast<std::size_t>(written);
    }
}

void read_all(int fd, void* data, std::size_t n) {
    char* p = static_cast<char*>(data);
    while (n > 0) {
        ssize_t got = ::read(fd, p, n);
        if (got < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("socket read failed: ") + std::strerror(errno));
        }
        if (got == 0) {
            throw TransportError("peer closed connection mid-frame");
        }
        p += got;
        n -= static_cast<std::size_t>(got);
    }
}

std::uint64_t read_u64(int fd) {
    std::uint8_t buf[8];
    read_all(fd, buf, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    }
    return v;
}

void write_u64(int fd, std::uint64_t v) {
    std::uint8_t buf[8];
    for (int i = 0; i < 8; ++i) {
        buf[i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
    write_all(fd, buf, 8);
}

void set_recv_timeout(int fd, std::chrono::seconds timeout) {
    timeval tv{};
    tv.tv_sec = timeout.count();
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

} // namespace

SocketTransport::SocketTransport(int rank, int comm_sz, std::uint16_t port)
    : rank_(rank), comm_sz_(comm_sz) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) {
        throw TransportError(std::string("socket() failed: ") + std::strerror(errno));
    }
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
        ::close(listen_fd_);
        throw TransportError("bind to port " + std::to_string(port) +
                             " failed: " + std::strerror(errno));
    }
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);

    if (::listen(listen_fd_, comm_sz_ + 4) < 0) {
        ::close(listen_fd_);
        throw TransportError(std::string("listen failed: ") + std::strerror(errno));
    }
    acceptor_ = std::thread([this] { accept_loop(); });
}

SocketTransport::~SocketTransport() {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        closed_ = true;
    }
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (acceptor_.joinable()) {
        acceptor_.join();
    }
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto& [_, fd] : inbound_) ::close(fd);
    for (auto& [_, fd] : outbound_) ::close(fd);
}

void SocketTransport::set_peers(EndpointTable table) {
    std::lock_guard<std::mutex> lock(mutex_);
    peers_ = std::move(table);
}

void SocketTransport::accept_loop() {
    for (;;) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            std::lock_guard<std::mutex> lock(mutex_);
            if (closed_) return;
            if (errno == EINTR) continue;
            return;
        }
        // Hello frame: "AGHL" + u32 source rank, little-endian.
        char magic[4];
        std::uint8_t rank_buf[4];
        try {
            set_recv_timeout(fd, kRecvDeadline);
            read_all(fd, magic, 4);
            read_all(fd, rank_buf, 4);
        } catch (const TransportError&) {
            ::close(fd);
            continue;
        }
        if (std::memcmp(magic, "AGHL", 4) != 0) {
            ::close(fd);
            continue;
        }
        int src = static_cast<int>(static_cast<std::uint32_t>(rank_buf[0]) |
                                   (static_cast<std::uint32_t>(rank_buf[1]) << 8) |
                                   (static_cast<std::uint32_t>(rank_buf[2]) << 16) |
                                   (static_cast<std::uint32_t>(rank_buf[3]) << 24));
        std::lock_guard<std::mutex> lock(mutex_);
        if (src < 0 || src >= comm_sz_ || inbound_.count(src)) {
            ::close(fd);
            continue;
        }
        inbound_[src] = fd;
        cv_.notify_all();
    }
}

int SocketTransport::connect_to(int dst) {
    EndpointTable::Entry entry;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = outbound_.find(dst);
        if (it != outbound_.end()) {
            return it->second;
        }
        if (dst < 0 || static_cast<std::size_t>(dst) >= peers_.entries.size()) {
            throw TransportError("no endpoint known for rank " + std::to_string(dst));
        }
        entry = peers_.entries[dst];
    }

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(entry.port);
    if (::inet_pton(AF_INET, entry.host == "localhost" ? "127.0.0.1" : entry.host.c_str(),
                    &addr.sin_addr) != 1) {
        throw TransportError("cannot parse endpoint host '" + entry.host + "'");
    }

    // Peers may still be starting up; retry with backoff.
    const auto deadline = std::chrono::steady_clock::now() + kConnectDeadline;
    for (;;) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) {
            throw TransportError(std::string("socket() failed: ") + std::strerror(errno));
        }
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) {
            int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            set_recv_timeout(fd, kRecvDeadline);
            std::uint8_t hello[8] = {'A', 'G', 'H', 'L',
                                     static_cast<std::uint8_t>(rank_),
                                     static_cast<std::uint8_t>(rank_ >> 8),
                                     static_cast<std::uint8_t>(rank_ >> 16),
                                     static_cast<std::uint8_t>(rank_ >> 24)};
            write_all(fd, hello, sizeof(hello));
            std::lock_guard<std::mutex> lock(mutex_);
            outbound_[dst] = fd;
            return fd;
        }
        ::close(fd);
        if (std::chrono::steady_clock::now() >= deadline) {
            throw TransportError("cannot connect to rank " + std::to_string(dst) + " at " +
                                 entry.host + ":" + std::to_string(entry.port) + ": " +
                                 std::strerror(errno));
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
}

void SocketTransport::send(int dst, std::vector<std::uint8_t> payload) {
    if (dst == rank_ || dst < 0 || dst >= comm_sz_) {
        throw TransportError("invalid send destination rank " + std::to_string(dst));
    }
    int fd = connect_to(dst);
    write_u64(fd, payload.size());
    write_all(fd, payload.data(), payload.size());
}

int SocketTransport::wait_for_inbound(int src) {
    std::unique_lock<std::mutex> lock(mutex_);
    if (!cv_.wait_for(lock, kRecvDeadline, [this, src] { return inbound_.count(src) != 0; })) {
        throw TransportError("timed out waiting for connection from rank " + std::to_string(src));
    }
    return inbound_[src];
}

std::vector<std::uint8_t> SocketTransport::recv(int src) {
    if (src == rank_ || src < 0 || src >= comm_sz_) {
        throw TransportError("invalid recv source rank " + std::to_string(src));
    }
    int fd = wait_for_inbound(src);
    std::uint64_t size = read_u64(fd);
    if (size > kMaxFrameBytes) {
        throw TransportError("frame length " + std::to_string(size) + " exceeds sanity limit");
    }
    std::vector<std::uint8_t> payload(size);
    if (size > 0) {
        read_all(fd, payload.data(), size);
    }
    return payload;
}

std::uint16_t probe_free_port() {
    SocketTransport probe(0, 1, 0);
    return probe.port();
}

} // namespace aggen
