#include "waynav/external_backend.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <json.hpp>
#include <regex>

#include "waynav/errors.hpp"

namespace waynav {

using nlohmann::json;

WireProtocol wire_protocol_from_name(const std::string& name) {
    if (name == "native") return WireProtocol::native;
    if (name == "chat") return WireProtocol::chat;
    throw ConfigError("unknown wire protocol '" + name + "' (expected native or chat)");
}

ExternalBackend::ExternalBackend(ExternalBackendConfig config) : config_(std::move(config)) {
    static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(config_.endpoint, m, url)) throw ConfigError("invalid endpoint URL '" + config_.endpoint + "'");
    base_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "/";
    if (config_.timeout_s <= 0) throw ConfigError("timeout must be positive");
    if (config_.max_retries < 0) throw ConfigError("max_retries must be non-negative");
}

std::string ExternalBackend::native_body(const DecisionRequest& request, bool reminder) const {
    json body;
    body["instruction"] = request.instruction;
    body["plan"] = request.plan;
    body["history"] = request.history;
    body["options"] = json::array();
    for (const auto& [id, text] : request.options) body["options"].push_back({{"id", id}, {"text", text}});
    if (!request.images.empty()) {
        body["images"] = json::array();
        for (const auto& img : request.images)
            body["images"].push_back({{"option_id", img.option_id}, {"mime", img.mime}, {"base64", img.base64}});
    }
    if (reminder) body["format_reminder"] = format_reminder();
    return body.dump();
}

std::string ExternalBackend::chat_body(const DecisionRequest& request,
                                       const std::vector<std::string>& failed_answers) const {
    json user;
    user["role"] = "user";
    if (request.images.empty()) {
        user["content"] = request.prompt;
    } else {
        json parts = json::array();
        parts.push_back({{"type", "text"}, {"text", request.prompt}});
        for (const auto& img : request.images) {
            parts.push_back({{"type", "text"}, {"text", "View for option " + img.option_id + ":"}});
            parts.push_back(
                {{"type", "image_url"}, {"image_url", {{"url", "data:" + img.mime + ";base64," + img.base64}}}});
        }
        user["content"] = parts;
    }
    json body;
    if (!config_.model.empty()) body["model"] = config_.model;
    body["temperature"] = config_.temperature;
    body["messages"] = json::array({json{{"role", "system"}, {"content", task_description()}}, user});
    for (const auto& bad : failed_answers) {
        body["messages"].push_back({{"role", "assistant"}, {"content", bad}});
        body["messages"].push_back({{"role", "user"}, {"content", format_reminder()}});
    }
    return body.dump();
}

std::string ExternalBackend::post(const std::string& body) const {
    httplib::Client client(base_);
    client.set_connection_timeout(config_.timeout_s, 0);
    client.set_read_timeout(config_.timeout_s, 0);
    client.set_write_timeout(config_.timeout_s, 0);
    httplib::Headers headers;
    if (const char* token = std::getenv(config_.token_env.c_str()); token && *token)
        headers.emplace("Authorization", std::string("Bearer ") + token);

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 200 && res->status < 300) return res->body;
        last_error = "HTTP " + std::to_string(res->status);
        if (res->status < 500 && res->status != 429) break;
    }
    throw BackendError("decision endpoint " + config_.endpoint + " failed: " + last_error);
}

std::string ExternalBackend::answer_text(const std::string& response_body, const std::vector<std::string>& offered,
                                         DecisionResponse& parsed) const {
    if (config_.protocol == WireProtocol::chat) {
        std::string text;
        try {
            text = json::parse(response_body).at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception&) {
            throw BackendError("chat endpoint returned an unexpected payload");
        }
        parsed = parse_decision(text, offered);
        return text;
    }
    json j;
    try {
        j = json::parse(response_body);
    } catch (const json::exception&) {
        throw ParseError("response is not JSON");
    }
    if (!j.is_object() || !j.contains("action") || !j["action"].is_string())
        throw ParseError("response has no string 'action' field");
    DecisionResponse r;
    r.thought = j.value("thought", "");
    r.plan = j.value("plan", "");
    // same letter rules as free text, so "b" or "B." are accepted
    r.action_id = parse_decision("Action: " + j["action"].get<std::string>(), offered).action_id;
    parsed = r;
    return response_body;
}

DecisionOutcome ExternalBackend::decide(const DecisionRequest& request, const DecisionContext&) {
    std::vector<std::string> offered;
    for (const auto& o : request.options) offered.push_back(o.first);

    DecisionOutcome out;
    std::vector<std::string> failed;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::string body =
            config_.protocol == WireProtocol::chat ? chat_body(request, failed) : native_body(request, attempt > 0);
        const std::string reply = post(body);
        out.raw_responses.push_back(reply);
        try {
            answer_text(reply, offered, out.response);
            out.fallback = attempt == 0 ? "" : "reprompt";
            return out;
        } catch (const ParseError&) {
            failed.push_back(config_.protocol == WireProtocol::chat
                                 ? json::parse(reply)["choices"][0]["message"]["content"].get<std::string>()
                                 : reply);
        }
    }
    // Stop is always the last option.
    out.response = {"Unreadable answers; stopping.", request.plan, request.options.back().first};
    out.fallback = "stop";
    return out;
}

}  // namespace waynav
