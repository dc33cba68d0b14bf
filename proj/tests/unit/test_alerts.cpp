#include <doctest.h>

#include <atomic>
#include <sstream>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "wattsentry/alerts.hpp"
#include "wattsentry/errors.hpp"

using namespace wattsentry;

namespace {

DetectionEvent confirmed_event() {
    DetectionEvent e;
    e.timestamp = 1260.0;
    e.device_id = "plug-7";
    e.scope = Scope::Udp;
    e.kind = EventKind::AttackConfirmed;
    e.slot_index = 6;
    e.slot_count = 9500;
    e.window_average = 9500.0;
    e.normal_upper = 6000;
    e.counter = 4;
    e.energy = EnergyEvidence{1.7, 1.42, false};
    return e;
}

}  // namespace

TEST_CASE("only anomaly events are alert worthy") {
    CHECK(is_alert_worthy(EventKind::AbnormalRegistered));
    CHECK(is_alert_worthy(EventKind::AttackConfirmed));
    CHECK(is_alert_worthy(EventKind::TrafficOnlyAnomaly));
    CHECK_FALSE(is_alert_worthy(EventKind::CooldownStarted));
    CHECK_FALSE(is_alert_worthy(EventKind::WindowVerdict));
}

TEST_CASE("console sink writes one line per alert-worthy event") {
    std::ostringstream out;
    AlertSinks sinks{&out, nullptr};

    DetectionEvent cooldown;
    cooldown.kind = EventKind::CooldownStarted;
    sinks.emit(cooldown);
    CHECK(out.str().empty());

    sinks.emit(confirmed_event());
    const std::string text = out.str();
    CHECK(text.find("ALERT ATTACK_CONFIRMED") == 0);
    CHECK(text.find("device=plug-7") != std::string::npos);
    CHECK(text.find("scope=UDP") != std::string::npos);
    CHECK(text.back() == '\n');
}

TEST_CASE("webhook urls must be plain http") {
    CHECK_THROWS_AS(WebhookSink("https://example.test/hook"), ConfigError);
    CHECK_THROWS_AS(WebhookSink("ftp://example.test"), ConfigError);
    CHECK_THROWS_AS(WebhookSink("example.test/hook"), ConfigError);
    WebhookSink ok("http://127.0.0.1:1/hook");  // parseable, never reached
    CHECK(ok.delivered() == 0);
}

TEST_CASE("webhook posts the event json and counts outcomes") {
    httplib::Server server;
    std::string seen_body;
    std::string seen_path;
    std::atomic<int> hits{0};
    server.Post("/hook", [&](const httplib::Request& req, httplib::Response& res) {
        seen_body = req.body;
        seen_path = req.path;
        ++hits;
        res.status = 200;
    });
    server.Post("/broken", [&](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
    });

    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    const std::string base = "http://127.0.0.1:" + std::to_string(port);
    {
        WebhookSink sink(base + "/hook");
        CHECK(sink.deliver(confirmed_event()));
        CHECK(sink.delivered() == 1);
        CHECK(sink.failed() == 0);
    }
    CHECK(hits == 1);
    CHECK(seen_path == "/hook");
    const auto doc = nlohmann::json::parse(seen_body);
    CHECK(doc.at("kind") == "ATTACK_CONFIRMED");
    CHECK(doc.at("device") == "plug-7");

    {
        WebhookSink sink(base + "/broken");
        CHECK_FALSE(sink.deliver(confirmed_event()));
        CHECK(sink.failed() == 1);
    }

    server.stop();
    runner.join();
}

TEST_CASE("unreachable webhooks fail without interrupting detection") {
    WebhookSink sink("http://127.0.0.1:9/hook");  // discard port, closed
    CHECK_FALSE(sink.deliver(confirmed_event()));
    CHECK_FALSE(sink.deliver(confirmed_event()));
    CHECK(sink.failed() == 2);
    CHECK(sink.delivered() == 0);
}

TEST_CASE("sink fan-out delivers to console and webhook together") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/hook", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 204;
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    std::ostringstream out;
    WebhookSink webhook("http://127.0.0.1:" + std::to_string(port) + "/hook");
    AlertSinks sinks{&out, &webhook};
    sinks.emit(confirmed_event());

    DetectionEvent verdict;
    verdict.kind = EventKind::WindowVerdict;
    sinks.emit(verdict);  // filtered before both sinks

    CHECK(hits == 1);
    CHECK(out.str().find("ALERT ATTACK_CONFIRMED") == 0);

    server.stop();
    runner.join();
}
