#pragma once

// Decision backend that forwards each prompt to an HTTP endpoint, either with the
// native JSON protocol or as a chat-completions payload.

#include <string>

#include "waynav/navigator.hpp"

namespace waynav {

enum class WireProtocol { native, chat };

WireProtocol wire_protocol_from_name(const std::string& name);

struct ExternalBackendConfig {
    std::string endpoint;  // http(s)://host[:port]/path
    WireProtocol protocol = WireProtocol::native;
    std::string model;
    double temperature = 0.0;
    std::string token_env = "WAYNAV_API_TOKEN";
    int timeout_s = 60;
    int max_retries = 2;  // extra attempts after a transport failure
};

class ExternalBackend final : public DecisionBackend {
public:
    explicit ExternalBackend(ExternalBackendConfig config);
    // One round-trip, plus one re-prompt with a format reminder if the answer does
    // not parse; a second unreadable answer falls back to Stop.
    DecisionOutcome decide(const DecisionRequest& request, const DecisionContext& context) override;

    // Request bodies, exposed for protocol tests.
    std::string native_body(const DecisionRequest& request, bool reminder) const;
    std::string chat_body(const DecisionRequest& request, const std::vector<std::string>& failed_answers) const;

private:
    std::string post(const std::string& body) const;
    std::string answer_text(const std::string& response_body, const std::vector<std::string>& offered,
                            DecisionResponse& parsed) const;

    ExternalBackendConfig config_;
    std::string base_;  // scheme://host:port
    std::string path_;
};

}  // namespace waynav
