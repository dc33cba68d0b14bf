#include "wattsentry/alerts.hpp"

#include <iostream>

#include <httplib.h>

#include "wattsentry/errors.hpp"

namespace wattsentry {

bool is_alert_worthy(EventKind kind) {
    switch (kind) {
        case EventKind::AbnormalRegistered:
        case EventKind::AttackConfirmed:
        case EventKind::TrafficOnlyAnomaly:
            return true;
        case EventKind::CooldownStarted:
        case EventKind::WindowVerdict:
            return false;
    }
    return false;
}

struct WebhookSink::Impl {
    std::string host;
    int port = 80;
    std::string target = "/";
    std::unique_ptr<httplib::Client> client;
    std::size_t delivered = 0;
    std::size_t failed = 0;
};

WebhookSink::WebhookSink(const std::string& url) : impl_(new Impl) {
    const std::string scheme = "http://";
    if (url.rfind(scheme, 0) != 0) {
        throw ConfigError("webhook URL must start with http:// (got '" + url + "')");
    }
    std::string rest = url.substr(scheme.size());
    const std::size_t slash = rest.find('/');
    if (slash != std::string::npos) {
        impl_->target = rest.substr(slash);
        rest = rest.substr(0, slash);
    }
    const std::size_t colon = rest.find(':');
    if (colon != std::string::npos) {
        impl_->host = rest.substr(0, colon);
        try {
            impl_->port = std::stoi(rest.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("bad webhook port in '" + url + "'");
        }
    } else {
        impl_->host = rest;
    }
    if (impl_->host.empty() || impl_->port <= 0 || impl_->port > 65535) {
        throw ConfigError("bad webhook URL: '" + url + "'");
    }
    impl_->client = std::make_unique<httplib::Client>(impl_->host, impl_->port);
    impl_->client->set_connection_timeout(2, 0);
    impl_->client->set_write_timeout(2, 0);
    impl_->client->set_read_timeout(2, 0);
}

WebhookSink::~WebhookSink() = default;
WebhookSink::WebhookSink(WebhookSink&&) noexcept = default;
WebhookSink& WebhookSink::operator=(WebhookSink&&) noexcept = default;

bool WebhookSink::deliver(const DetectionEvent& event) {
    const std::string body = event_to_json(event).dump();
    auto res = impl_->client->Post(impl_->target, body, "application/json");
    const bool ok = res && res->status >= 200 && res->status < 300;
    if (ok) {
        ++impl_->delivered;
    } else {
        if (impl_->failed == 0) {
            std::cerr << "wattsentry: webhook delivery to " << impl_->host << ":"
                      << impl_->port << impl_->target << " failed"
                      << (res ? " with status " + std::to_string(res->status)
                              : " (no response)")
                      << "; detection continues\n";
        }
        ++impl_->failed;
    }
    return ok;
}

std::size_t WebhookSink::delivered() const { return impl_->delivered; }
std::size_t WebhookSink::failed() const { return impl_->failed; }

void AlertSinks::emit(const DetectionEvent& event) const {
    if (!is_alert_worthy(event.kind)) {
        return;
    }
    if (console != nullptr) {
        *console << format_alert_line(event) << '\n';
    }
    if (webhook != nullptr) {
        webhook->deliver(event);
    }
}

}  // namespace wattsentry
