#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace aggen {

// Reliable, ordered, per-(src,dst) message passing between workers. One
// endpoint per rank; send/recv move whole messages (a serialized partial
// graph or a small control frame).
class Transport {
public:
    virtual ~Transport() = default;

    virtual int rank() const = 0;
    virtual int comm_sz() const = 0;
    virtual void send(int dst, std::vector<std::uint8_t> payload) = 0;
    virtual std::vector<std::uint8_t> recv(int src) = 0;
};

// Channel mesh for workers running as threads in one process. Keeps a
// message log (src, dst, leading magic) that tests use to assert
// communication patterns.
class MemoryMesh {
public:
    explicit MemoryMesh(int comm_sz);
    ~MemoryMesh();

    std::unique_ptr<Transport> endpoint(int rank);

    struct Record {
        int src;
        int dst;
        std::uint64_t bytes;
        std::string magic; // first four payload bytes
    };
    std::vector<Record> log() const;

private:
    friend class MemoryEndpoint;

    struct Channel {
        std::mutex mutex;
        std::condition_variable cv;
        std::deque<std::vector<std::uint8_t>> queue;
    };

    Channel& channel(int src, int dst) { return channels_[src * comm_sz_ + dst]; }

    int comm_sz_;
    std::vector<Channel> channels_;
    mutable std::mutex log_mutex_;
    std::vector<Record> log_;
};

// host:port per rank; rank 0 is always the merge master.
struct EndpointTable {
    struct Entry {
        std::string host;
        std::uint16_t port;
    };
    std::vector<Entry> entries;

    std::string to_flag() const;                      // "host:port,host:port,..."
    static EndpointTable from_flag(const std::string& flag);
};

// Loopback stream sockets; frames are a u64 little-endian payload length
// followed by the payload. A newly opened connection announces its source
// rank with a hello frame. Works for workers as threads in one process or
// one process per worker.
class SocketTransport : public Transport {
public:
    // Binds and listens on `port` (0 picks an ephemeral port; see port()).
    // Peers must be provided via set_peers before the first send.
    SocketTransport(int rank, int comm_sz, std::uint16_t port);
    ~SocketTransport() override;

    void set_peers(EndpointTable table);
    std::uint16_t port() const { return port_; }

    int rank() const override { return rank_; }
    int comm_sz() const override { return comm_sz_; }
    void send(int dst, std::vector<std::uint8_t> payload) override;
    std::vector<std::uint8_t> recv(int src) override;

private:
    void accept_loop();
    int connect_to(int dst);
    int wait_for_inbound(int src);

    int rank_;
    int comm_sz_;
    std::uint16_t port_ = 0;
    int listen_fd_ = -1;
    EndpointTable peers_;

    std::thread acceptor_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::map<int, int> inbound_;  // src rank -> fd
    std::map<int, int> outbound_; // dst rank -> fd
    bool closed_ = false;
};

// Binds port 0 on loopback, records the assigned port, closes the socket.
// Used by the multi-process launcher to pre-assign child ports.
std::uint16_t probe_free_port();

} // namespace aggen
