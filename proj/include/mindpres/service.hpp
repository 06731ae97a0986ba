#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

#include "mindpres/evaluator.hpp"

namespace mindpres::evaluator {

/// Newline-delimited JSON assessment protocol, independent of transport.
///
/// One request line in, one response line out (without the trailing newline).
/// Malformed input yields an in-band error object; the session continues.
class AssessmentProtocol {
public:
    explicit AssessmentProtocol(const ModelStore& store) : store_(store) {}

    std::string handle_line(std::string_view line);

private:
    const ModelStore& store_;
    std::atomic<Tick> clock_{0};
};

std::string error_line(std::string_view code, std::string_view message);

/// TCP front end for AssessmentProtocol. Each accepted connection is served on
/// its own thread; all sessions share the store read-only.
class AssessmentServer {
public:
    AssessmentServer(const ModelStore& store, std::string host, std::uint16_t port);
    ~AssessmentServer();

    AssessmentServer(const AssessmentServer&) = delete;
    AssessmentServer& operator=(const AssessmentServer&) = delete;

    /// Binds and starts accepting. Throws TransportError if the endpoint
    /// cannot be bound.
    void start();
    void stop();

    /// Bound port; useful when constructed with port 0.
    std::uint16_t port() const { return port_; }

    static constexpr std::size_t kMaxLineBytes = 1 << 20;

private:
    void accept_loop();
    void serve_session(int fd);

    AssessmentProtocol protocol_;
    std::string host_;
    std::uint16_t port_;
    int listen_fd_ = -1;
    std::atomic<bool> running_{false};
    std::thread acceptor_;
    std::mutex sessions_mutex_;
    std::list<std::pair<int, std::thread>> sessions_;
};

/// Blocking line-oriented client for one session.
class AssessmentClient {
public:
    AssessmentClient(const std::string& host, std::uint16_t port);
    ~AssessmentClient();

    AssessmentClient(const AssessmentClient&) = delete;
    AssessmentClient& operator=(const AssessmentClient&) = delete;

    void send_line(std::string_view line);
    std::string read_line();

    std::string round_trip(std::string_view line)
    {
        send_line(line);
        return read_line();
    }

private:
    int fd_ = -1;
    std::string buffer_;
};

/// Splits "host:port"; throws ConfigError.
std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view endpoint);

/// Where the device obtains risk assessments.
class Evaluator {
public:
    virtual ~Evaluator() = default;
    virtual RiskAssessment assess(const AppManifest& manifest, Tick at) = 0;
};

/// In-process evaluation; no network hop.
class LocalEvaluator final : public Evaluator {
public:
    explicit LocalEvaluator(std::shared_ptr<const ModelBundle> bundle) : bundle_(std::move(bundle)) {}
    RiskAssessment assess(const AppManifest& manifest, Tick at) override;

private:
    std::shared_ptr<const ModelBundle> bundle_;
};

/// Offloads assessment to an AssessmentServer.
class RemoteEvaluator final : public Evaluator {
public:
    RemoteEvaluator(const std::string& host, std::uint16_t port) : client_(host, port) {}
    RiskAssessment assess(const AppManifest& manifest, Tick at) override;

private:
    AssessmentClient client_;
};

Json assess_request(const AppManifest& manifest);

}  // namespace mindpres::evaluator
