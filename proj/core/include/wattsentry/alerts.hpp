#pragma once

// Alert fan-out. Registered abnormalities, confirmed attacks and traffic-
// only anomalies are written as one-line alerts and optionally POSTed to a
// webhook; bookkeeping events (cooldowns, window verdicts) are persisted
// but never alerted.

#include <iosfwd>
#include <memory>
#include <string>

#include "wattsentry/detector.hpp"

namespace wattsentry {

bool is_alert_worthy(EventKind kind);

// POSTs the JSON-serialized event to an http:// endpoint. Delivery failures
// are reported on stderr and do not interrupt detection.
class WebhookSink {
public:
    // Accepts `http://host[:port][/path]`; anything else raises ConfigError.
    explicit WebhookSink(const std::string& url);
    ~WebhookSink();
    WebhookSink(WebhookSink&&) noexcept;
    WebhookSink& operator=(WebhookSink&&) noexcept;

    // True when the endpoint accepted the event with a 2xx status.
    bool deliver(const DetectionEvent& event);

    std::size_t delivered() const;
    std::size_t failed() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct AlertSinks {
    std::ostream* console = nullptr;  // alert lines, one per event
    WebhookSink* webhook = nullptr;

    // Routes one event to every configured sink; non-alert kinds pass
    // through untouched.
    void emit(const DetectionEvent& event) const;
};

}  // namespace wattsentry
