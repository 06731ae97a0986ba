#include "mindpres/service.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "mindpres/error.hpp"

namespace mindpres::evaluator {

std::string error_line(std::string_view code, std::string_view message)
{
    Json j;
    j["type"] = "error";
    j["code"] = code;
    j["message"] = message;
    return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

Json assess_request(const AppManifest& m)
{
    Json j;
    j["type"] = "assess";
    j["app_id"] = m.app_id;
    j["permissions"] = m.permissions;
    j["intents"] = m.intents;
    j["hardware_features"] = m.hardware_features;
    return j;
}

std::string AssessmentProtocol::handle_line(std::string_view line)
{
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    AppManifest manifest;
    try {
        const Json req = Json::parse(line);
        if (!req.is_object()) return error_line("parse", "request must be a JSON object");
        const auto type = req.find("type");
        if (type == req.end() || !type->is_string()) return error_line("parse", "request lacks a string 'type'");
        if (type->get<std::string>() != "assess")
            return error_line("parse", "unknown request type '" + type->get<std::string>() + "'");
        manifest = manifest_from_json(req);
    } catch (const Json::exception& e) {
        return error_line("parse", e.what());
    } catch (const Error& e) {
        return error_line("parse", e.what());
    }

    try {
        const auto bundle = store_.current();
        if (!bundle) return error_line("model", "no model loaded");
        const auto a = assess(manifest, *bundle, clock_.fetch_add(1));
        Json resp;
        resp["type"] = "assessment";
        resp["app_id"] = a.app_id;
        resp["risk"] = to_string(a.risk);
        resp["score"] = a.score;
        resp["model_id"] = a.model_id;
        return resp.dump(-1, ' ', false, Json::error_handler_t::replace);
    } catch (const ModelError& e) {
        return error_line("model", e.what());
    } catch (const std::exception& e) {
        return error_line("internal", e.what());
    }
}

namespace {

void send_all(int fd, std::string_view data)
{
    while (!data.empty()) {
        const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("send failed: ") + std::strerror(errno));
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

sockaddr_in resolve(const std::string& host, std::uint16_t port)
{
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;

    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || !res)
        throw TransportError("cannot resolve host '" + host + "'");
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    ::freeaddrinfo(res);
    return addr;
}

}  // namespace

AssessmentServer::AssessmentServer(const ModelStore& store, std::string host, std::uint16_t port)
    : protocol_(store), host_(std::move(host)), port_(port)
{
}

AssessmentServer::~AssessmentServer()
{
    stop();
}

void AssessmentServer::start()
{
    const sockaddr_in addr = resolve(host_, port_);
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
    const int yes = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    if (::bind(listen_fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0 ||
        ::listen(listen_fd_, 64) < 0) {
        const std::string why = std::strerror(errno);
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw TransportError("cannot bind " + host_ + ":" + std::to_string(port_) + ": " + why);
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
}

void AssessmentServer::stop()
{
    if (!running_.exchange(false)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (acceptor_.joinable()) acceptor_.join();
    std::list<std::pair<int, std::thread>> sessions;
    {
        std::lock_guard lock(sessions_mutex_);
        sessions.swap(sessions_);
        for (auto& [fd, thread] : sessions)
            if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
    }
    for (auto& [fd, thread] : sessions)
        if (thread.joinable()) thread.join();
}

void AssessmentServer::accept_loop()
{
    while (running_) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            break;
        }
        std::lock_guard lock(sessions_mutex_);
        if (!running_) {
            ::close(fd);
            break;
        }
        sessions_.emplace_back(fd, std::thread([this, fd] { serve_session(fd); }));
    }
}

void AssessmentServer::serve_session(int fd)
{
    std::string buffer;
    bool discarding = false;
    char chunk[4096];
    try {
        for (;;) {
            const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) break;
            buffer.append(chunk, static_cast<std::size_t>(n));
            std::size_t start = 0;
            for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
                if (discarding) {
                    discarding = false;
                    continue;
                }
                std::string response = protocol_.handle_line(std::string_view(buffer).substr(start, nl - start));
                response.push_back('\n');
                send_all(fd, response);
            }
            buffer.erase(0, start);
            if (buffer.size() > kMaxLineBytes) {
                buffer.clear();
                if (!discarding) send_all(fd, error_line("parse", "request line too long") + "\n");
                discarding = true;
            }
        }
    } catch (const TransportError&) {
        // peer went away mid-response
    }
    std::lock_guard lock(sessions_mutex_);
    for (auto& session : sessions_)
        if (session.first == fd) session.first = -1;
    ::close(fd);
}

AssessmentClient::AssessmentClient(const std::string& host, std::uint16_t port)
{
    const sockaddr_in addr = resolve(host, port);
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
    if (::connect(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0) {
        const std::string why = std::strerror(errno);
        ::close(fd_);
        throw TransportError("cannot connect to " + host + ":" + std::to_string(port) + ": " + why);
    }
}

AssessmentClient::~AssessmentClient()
{
    if (fd_ >= 0) ::close(fd_);
}

void AssessmentClient::send_line(std::string_view line)
{
    std::string framed(line);
    framed.push_back('\n');
    send_all(fd_, framed);
}

std::string AssessmentClient::read_line()
{
    char chunk[4096];
    for (;;) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) throw TransportError("connection closed before a full response line");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

std::pair<std::string, std::uint16_t> parse_endpoint(std::string_view endpoint)
{
    const auto colon = endpoint.rfind(':');
    if (colon == std::string_view::npos || colon == 0) throw ConfigError("endpoint must be host:port");
    const std::string port_text(endpoint.substr(colon + 1));
    char* end = nullptr;
    const long port = std::strtol(port_text.c_str(), &end, 10);
    if (port_text.empty() || *end != '\0' || port < 0 || port > 65535)
        throw ConfigError("invalid port in endpoint '" + std::string(endpoint) + "'");
    return {std::string(endpoint.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

RiskAssessment LocalEvaluator::assess(const AppManifest& manifest, Tick at)
{
    return evaluator::assess(manifest, *bundle_, at);
}

RiskAssessment RemoteEvaluator::assess(const AppManifest& manifest, Tick at)
{
    const auto line = client_.round_trip(assess_request(manifest).dump());
    const Json resp = Json::parse(line);
    if (resp.value("type", "") != "assessment")
        throw ModelError("remote evaluator returned an error: " + resp.value("message", line));
    RiskAssessment a;
    a.app_id = resp.at("app_id").get<std::string>();
    a.risk = risk_from_string(resp.at("risk").get<std::string>());
    a.score = resp.at("score").get<double>();
    a.model_id = resp.at("model_id").get<std::string>();
    a.assessed_at = at;
    return a;
}

}  // namespace mindpres::evaluator
