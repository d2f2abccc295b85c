#include <nlohmann/json.hpp>

#define CPPHTTPLIB_NO_EXCEPTIONS 0
#include <httplib.h>

#include "lta/errors.hpp"
#include "lta/generation.hpp"

namespace lta {

using nlohmann::json;

namespace {

struct ParsedUrl {
    std::string scheme;
    std::string host_port;  // "host:port" or "host"
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    ParsedUrl out;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("backend url '" + url + "' lacks a scheme (expected http://...)");
    out.scheme = url.substr(0, scheme_end);
    auto rest = url.substr(scheme_end + 3);
    auto slash = rest.find('/');
    out.host_port = slash == std::string::npos ? rest : rest.substr(0, slash);
    out.path = slash == std::string::npos ? "/" : rest.substr(slash);
    if (out.host_port.empty()) throw ConfigError("backend url '" + url + "' lacks a host");
    return out;
}

}  // namespace

HttpBackend::HttpBackend(std::string url, std::string api_key, std::chrono::milliseconds timeout)
    : url_(std::move(url)), api_key_(std::move(api_key)), timeout_(timeout) {
    parse_url(url_);  // validate eagerly
}

std::string HttpBackend::generate(const std::string& prompt, const DecodeParams& params) {
    const ParsedUrl url = parse_url(url_);

    httplib::Client client((url.scheme + "://" + url.host_port).c_str());
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs =
        std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    const json body{{"prompt", prompt},
                    {"max_tokens", params.max_tokens},
                    {"temperature", params.temperature}};

    auto res = client.Post(url.path.c_str(), headers, body.dump(), "application/json");
    if (!res)
        throw TransportError("no response from " + url_ + " (" + to_string(res.error()) + ")",
                             /*transient=*/true);
    if (res->status == 429 || res->status >= 500)
        throw TransportError("backend returned status " + std::to_string(res->status),
                             /*transient=*/true);
    if (res->status < 200 || res->status >= 300)
        throw TransportError("backend returned status " + std::to_string(res->status),
                             /*transient=*/false);

    json doc;
    try {
        doc = json::parse(res->body);
    } catch (const json::exception& e) {
        throw TransportError(std::string("backend returned invalid JSON: ") + e.what(),
                             /*transient=*/false);
    }
    if (!doc.is_object() || !doc.contains("text") || !doc["text"].is_string())
        throw TransportError("backend response lacks a string 'text' field",
                             /*transient=*/false);
    return doc["text"].get<std::string>();
}

}  // namespace lta
