#include <chrono>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "doctest.h"
#include "ghal/server.hpp"
#include "golden.hpp"
#include "json.hpp"

using namespace ghal;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

class RunningServer {
public:
    explicit RunningServer(ServerOptions opts)
        : server_(golden::fixture().world, &golden::fixture().policy, with_free_port(std::move(opts))),
          thread_([this] { server_.run(); }) {}
    ~RunningServer() {
        server_.stop();
        thread_.join();
    }
    [[nodiscard]] unsigned short port() const { return server_.port(); }

private:
    static ServerOptions with_free_port(ServerOptions o) {
        o.port = 0;
        o.session = golden::session_config();
        return o;
    }
    SessionServer server_;
    std::thread thread_;
};

class Client {
public:
    explicit Client(unsigned short port, const std::string& path = "/session") : ws_(io_) {
        ws_.next_layer().connect(tcp::endpoint(net::ip::make_address("127.0.0.1"), port));
        ws_.handshake("127.0.0.1", path);
    }
    void send(const std::string& text) { ws_.write(net::buffer(text)); }
    void send_binary(const std::string& bytes) {
        ws_.binary(true);
        ws_.write(net::buffer(bytes));
        ws_.text(true);
    }
    std::string receive() {
        beast::flat_buffer buf;
        ws_.read(buf);
        return beast::buffers_to_string(buf.data());
    }
    /// Reads until the server closes; returns the close code.
    int await_close() {
        beast::flat_buffer buf;
        beast::error_code ec;
        while (!ec) {
            ws_.read(buf, ec);
            buf.clear();
        }
        CHECK(ec == websocket::error::closed);
        return ws_.reason().code;
    }
    void close() { ws_.close(websocket::close_code::normal); }

private:
    net::io_context io_;
    websocket::stream<tcp::socket> ws_;
};

std::vector<std::string> load_expected(const std::string& name) {
    return golden::read_lines(golden::kDir / (name + ".server.jsonl"));
}

}  // namespace

TEST_SUITE("server") {
    TEST_CASE("headless client receives the golden broadcasts") {
        ServerOptions opts;
        opts.cadence_ms = 0;
        RunningServer server(opts);
        Client c(server.port());
        const auto script = golden::read_lines(golden::kDir / "operator.client.jsonl");
        const auto expected = load_expected("operator");
        REQUIRE(expected.size() == script.size() + 1);
        CHECK(c.receive() == expected[0]);
        for (std::size_t i = 0; i < script.size(); ++i) {
            c.send(script[i]);
            INFO("message ", i, ": ", script[i]);
            CHECK(c.receive() == expected[i + 1]);
        }
        c.close();
    }

    TEST_CASE("version mismatch closes with a coded reason") {
        ServerOptions opts;
        opts.cadence_ms = 0;
        RunningServer server(opts);
        Client c(server.port());
        const auto script = golden::read_lines(golden::kDir / "version.client.jsonl");
        const auto expected = load_expected("version");
        CHECK(c.receive() == expected[0]);
        c.send(script[0]);
        CHECK(c.receive() == expected[1]);
        c.send(script[1]);
        CHECK(c.receive() == expected[2]);
        CHECK(c.await_close() == kCloseUnsupportedVersion);
    }

    TEST_CASE("binary frames are rejected") {
        ServerOptions opts;
        opts.cadence_ms = 0;
        RunningServer server(opts);
        Client c(server.port());
        (void)c.receive();
        c.send_binary("\x01\x02");
        CHECK(c.await_close() == kCloseNotText);
    }

    TEST_CASE("other paths are not found") {
        ServerOptions opts;
        opts.cadence_ms = 0;
        RunningServer server(opts);
        CHECK_THROWS(Client(server.port(), "/elsewhere"));
        net::io_context io;
        beast::tcp_stream s(io);
        s.connect(tcp::endpoint(net::ip::make_address("127.0.0.1"), server.port()));
        http::request<http::empty_body> req(http::verb::get, "/session", 11);
        req.set(http::field::host, "127.0.0.1");
        http::write(s, req);
        beast::flat_buffer buf;
        http::response<http::string_body> res;
        http::read(s, buf, res);
        CHECK(res.result() == http::status::not_found);
    }

    TEST_CASE("sessions are independent") {
        ServerOptions opts;
        opts.cadence_ms = 0;
        RunningServer server(opts);
        Client a(server.port());
        Client b(server.port());
        const auto expected = load_expected("operator");
        const auto script = golden::read_lines(golden::kDir / "operator.client.jsonl");
        CHECK(a.receive() == expected[0]);
        CHECK(b.receive() == expected[0]);
        a.send(script[0]);
        CHECK(a.receive() == expected[1]);
        b.send(script[0]);
        CHECK(b.receive() == expected[1]);
        a.send(script[1]);
        CHECK(a.receive() == expected[2]);
        a.close();
        b.close();
    }

    TEST_CASE("cadence ticks and session traces") {
        const auto dir = std::filesystem::temp_directory_path() / "ghal_server_traces";
        std::filesystem::remove_all(dir);
        ServerOptions opts;
        opts.cadence_ms = 20;
        opts.trace_dir = dir;
        RunningServer server(opts);
        {
            Client c(server.port());
            (void)c.receive();
            for (int i = 0; i < 3; ++i) {
                const json b = json::parse(c.receive());
                CHECK(b["event"] == "cadence");
                CHECK(b["tick"] == i);
            }
            c.close();
        }
        const auto trace = dir / "session-1.jsonl";
        for (int i = 0; i < 200 && !std::filesystem::exists(trace); ++i) {
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        REQUIRE(std::filesystem::exists(trace));
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        const TraceLog log = read_trace(trace);
        CHECK(log.header.source == "session");
        CHECK(log.ticks.size() >= 3);
        std::filesystem::remove_all(dir);
    }
}
