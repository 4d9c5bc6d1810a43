#include "ghal/server.hpp"

#include <atomic>
#include <deque>
#include <iostream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace ghal {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket socket, const World& world, const GuidancePolicy* policy, const ServerOptions& opts,
               std::uint64_t id)
        : ws_(std::move(socket)),
          timer_(ws_.get_executor()),
          session_(world, policy, opts.session),
          opts_(opts),
          id_(id) {}

    void start() {
        http::async_read(ws_.next_layer(), buffer_, request_,
                         [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_request(ec); });
    }

private:
    void on_request(beast::error_code ec) {
        if (ec) {
            return;
        }
        if (!websocket::is_upgrade(request_) || request_.target() != "/session") {
            auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found, request_.version());
            res->set(http::field::content_type, "text/plain");
            res->body() = "websocket endpoint is /session\n";
            res->prepare_payload();
            http::async_write(ws_.next_layer(), *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
                beast::error_code ignored;
                self->ws_.next_layer().socket().shutdown(tcp::socket::shutdown_both, ignored);
            });
            return;
        }
        ws_.text(true);
        ws_.async_accept(request_, [self = shared_from_this()](beast::error_code e) { self->on_accept(e); });
    }

    void on_accept(beast::error_code ec) {
        if (ec) {
            return;
        }
        send(session_.snapshot());
        arm_cadence();
        read();
    }

    void read() {
        buffer_.clear();
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
        if (ec) {
            finish();
            return;
        }
        if (!ws_.got_text()) {
            close(kCloseNotText, "text frames only");
            return;
        }
        const SessionReply reply = session_.handle(beast::buffers_to_string(buffer_.data()));
        send(reply.message);
        if (reply.close) {
            close(*reply.close, "unsupported protocol version");
            return;
        }
        arm_cadence();
        read();
    }

    void arm_cadence() {
        if (opts_.cadence_ms <= 0 || closing_) {
            return;
        }
        timer_.expires_after(std::chrono::milliseconds(opts_.cadence_ms));
        timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
            if (ec || self->closing_) {
                return;  // cancelled by a client message
            }
            self->send(self->session_.cadence());
            self->arm_cadence();
        });
    }

    void send(std::string msg) {
        outbox_.push_back(std::move(msg));
        if (outbox_.size() == 1) {
            write_next();
        }
    }

    void write_next() {
        ws_.async_write(net::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->outbox_.clear();
                return;
            }
            self->outbox_.pop_front();
            if (!self->outbox_.empty()) {
                self->write_next();
            } else if (self->pending_close_) {
                self->do_close();
            }
        });
    }

    void close(int code, const char* reason) {
        closing_ = true;
        timer_.cancel();
        close_reason_.code = static_cast<std::uint16_t>(code);
        close_reason_.reason = reason;
        pending_close_ = true;
        if (outbox_.empty()) {
            do_close();
        }
    }

    void do_close() {
        pending_close_ = false;
        ws_.async_close(close_reason_, [self = shared_from_this()](beast::error_code) { self->finish(); });
    }

    void finish() {
        if (finished_) {
            return;
        }
        finished_ = true;
        closing_ = true;
        timer_.cancel();
        if (!opts_.trace_dir.empty()) {
            try {
                std::filesystem::create_directories(opts_.trace_dir);
                write_trace(opts_.trace_dir / ("session-" + std::to_string(id_) + ".jsonl"), session_.record());
            } catch (const std::exception& e) {
                std::cerr << "session " << id_ << ": " << e.what() << '\n';
            }
        }
    }

    websocket::stream<beast::tcp_stream> ws_;
    net::steady_timer timer_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> request_;
    Session session_;
    const ServerOptions& opts_;
    std::uint64_t id_;
    std::deque<std::string> outbox_;
    websocket::close_reason close_reason_;
    bool closing_ = false;
    bool pending_close_ = false;
    bool finished_ = false;
};

}  // namespace

struct SessionServer::Impl {
    Impl(const World& w, const GuidancePolicy* p, ServerOptions o)
        : world(w), policy(p), opts(std::move(o)), acceptor(io) {
        const tcp::endpoint ep(net::ip::make_address(opts.address), opts.port);
        acceptor.open(ep.protocol());
        acceptor.set_option(net::socket_base::reuse_address(true));
        acceptor.bind(ep);
        acceptor.listen();
        // fail early on a bad session configuration
        Session probe(world, policy, opts.session);
    }

    void accept() {
        acceptor.async_accept(net::make_strand(io), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                return;  // acceptor closed
            }
            try {
                std::make_shared<Connection>(std::move(socket), world, policy, opts, next_id++)->start();
            } catch (const std::exception& e) {
                std::cerr << "session setup failed: " << e.what() << '\n';
            }
            accept();
        });
    }

    const World& world;
    const GuidancePolicy* policy;
    ServerOptions opts;
    net::io_context io;
    tcp::acceptor acceptor;
    std::uint64_t next_id = 1;
};

SessionServer::SessionServer(const World& world, const GuidancePolicy* policy, ServerOptions opts)
    : impl_(std::make_unique<Impl>(world, policy, std::move(opts))) {}

SessionServer::~SessionServer() = default;

unsigned short SessionServer::port() const noexcept { return impl_->acceptor.local_endpoint().port(); }

void SessionServer::run() {
    impl_->accept();
    impl_->io.run();
}

void SessionServer::stop() {
    net::post(impl_->io, [this] {
        beast::error_code ignored;
        impl_->acceptor.close(ignored);
        impl_->io.stop();
    });
}

}  // namespace ghal
