#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "persona/providers.hpp"
#include "persona/text.hpp"

using nlohmann::json;

namespace persona::providers {

namespace {

// ${VAR} -> getenv("VAR"); unset variables expand empty so a missing key never
// leaks a literal placeholder onto the wire.
std::string expand_env(const std::string& value) {
    std::string out;
    std::size_t i = 0;
    while (i < value.size()) {
        if (value[i] == '$' && i + 1 < value.size() && value[i + 1] == '{') {
            const auto close = value.find('}', i + 2);
            if (close != std::string::npos) {
                const std::string var = value.substr(i + 2, close - i - 2);
                if (const char* v = std::getenv(var.c_str())) out += v;
                i = close + 1;
                continue;
            }
        }
        out.push_back(value[i++]);
    }
    return out;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

std::string render_body(const RemoteEndpoint& endpoint, const std::string& text, int trait_index,
                        int run_index, const std::string& attribute) {
    std::string body = endpoint.body_template;
    body = replace_all(std::move(body), "{{text}}", json(text).dump().substr(1, json(text).dump().size() - 2));
    if (trait_index >= 1)
        body = replace_all(std::move(body), "{{trait_name}}", std::string(trait_name(trait_index)));
    body = replace_all(std::move(body), "{{trait_index}}", std::to_string(trait_index));
    body = replace_all(std::move(body), "{{run_index}}", std::to_string(run_index));
    body = replace_all(std::move(body), "{{attribute}}", attribute);
    return body;
}

struct ParsedUrl {
    std::string scheme_host; // scheme://host[:port]
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint url must include a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

std::string http_post_json(const RemoteEndpoint& endpoint, const std::string& body,
                           TransportStats& stats) {
    const ParsedUrl url = split_url(endpoint.url);
    httplib::Client client(url.scheme_host);
    client.set_connection_timeout(endpoint.timeout_seconds);
    client.set_read_timeout(endpoint.timeout_seconds);
    httplib::Headers headers;
    for (const auto& [name, value] : endpoint.headers) headers.emplace(name, expand_env(value));

    stats.requests.fetch_add(1, std::memory_order_relaxed);
    const auto res = client.Post(url.path, headers, body, "application/json");
    if (!res)
        throw ProviderError("http request to " + endpoint.url + " failed: " +
                            httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw ProviderError("http request to " + endpoint.url + " returned status " +
                            std::to_string(res->status));
    return res->body;
}

std::string extract_json_path(const std::string& json_text, const std::string& dotted_path) {
    json node;
    try {
        node = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ProviderError(std::string("provider reply is not valid JSON: ") + e.what());
    }
    std::istringstream parts(dotted_path);
    std::string part;
    while (std::getline(parts, part, '.')) {
        if (node.is_array()) {
            std::size_t index = 0;
            try {
                index = static_cast<std::size_t>(std::stoul(part));
            } catch (const std::exception&) {
                throw ProviderError("non-numeric index '" + part + "' into JSON array");
            }
            if (index >= node.size())
                throw ProviderError("reply path '" + dotted_path + "' missing (index " + part + ")");
            node = node[index];
        } else if (node.is_object()) {
            if (!node.contains(part))
                throw ProviderError("reply path '" + dotted_path + "' missing (key '" + part + "')");
            node = node[part];
        } else {
            throw ProviderError("reply path '" + dotted_path + "' descends into a scalar");
        }
    }
    if (node.is_string()) return node.get<std::string>();
    return node.dump();
}

namespace {

std::shared_ptr<TokenBucket> make_bucket(const RemoteEndpoint& endpoint) {
    // Burst capacity equals one second of traffic, floor 1.
    const double cap = endpoint.requests_per_second > 1.0 ? endpoint.requests_per_second : 1.0;
    return std::make_shared<TokenBucket>(cap, endpoint.requests_per_second);
}

} // namespace

HttpPersonalityProvider::HttpPersonalityProvider(RemoteEndpoint endpoint,
                                                 std::shared_ptr<TransportStats> stats)
    : endpoint_(std::move(endpoint)), stats_(std::move(stats)), bucket_(make_bucket(endpoint_)) {}

double HttpPersonalityProvider::score_personality(const std::string& text, int trait_index,
                                                  int run_index) {
    bucket_->acquire();
    const std::string body = render_body(endpoint_, text, trait_index, run_index, "");
    const std::string reply = http_post_json(endpoint_, body, *stats_);
    return parse_first_number(extract_json_path(reply, endpoint_.response_path));
}

HttpContentClassifier::HttpContentClassifier(RemoteEndpoint endpoint,
                                             std::shared_ptr<TransportStats> stats)
    : endpoint_(std::move(endpoint)), stats_(std::move(stats)), bucket_(make_bucket(endpoint_)) {}

CategorySet HttpContentClassifier::classify(const std::string& text) {
    bucket_->acquire();
    const std::string body = render_body(endpoint_, text, 0, 0, "");
    const std::string reply = http_post_json(endpoint_, body, *stats_);
    const std::string list_text = extract_json_path(reply, endpoint_.response_path);
    json list;
    try {
        list = json::parse(list_text);
    } catch (const json::exception&) {
        throw ProviderError("classifier reply path does not address a category array");
    }
    if (!list.is_array()) throw ProviderError("classifier reply path does not address an array");
    std::vector<CategoryPath> paths;
    for (const auto& entry : list) {
        if (!entry.contains("name") || !entry.contains("confidence"))
            throw ProviderError("classifier category entry missing name/confidence");
        paths.push_back(CategoryPath::parse(entry["name"].get<std::string>(),
                                            entry["confidence"].get<double>()));
    }
    return make_category_set(std::move(paths));
}

HttpOffensivenessScorer::HttpOffensivenessScorer(RemoteEndpoint endpoint,
                                                 std::shared_ptr<TransportStats> stats)
    : endpoint_(std::move(endpoint)), stats_(std::move(stats)), bucket_(make_bucket(endpoint_)) {}

std::map<std::string, double> HttpOffensivenessScorer::score_offense(const std::string& text) {
    bucket_->acquire();
    const std::string body = render_body(endpoint_, text, 0, 0, "");
    const std::string reply = http_post_json(endpoint_, body, *stats_);
    std::map<std::string, double> scores;
    for (const auto attr : kOffenseAttributes) {
        const std::string name(attr);
        auto wire = endpoint_.attribute_wire_names.find(name);
        const std::string wire_name =
            wire != endpoint_.attribute_wire_names.end() ? wire->second : name;
        const std::string path = replace_all(endpoint_.attribute_path, "{{attribute}}", wire_name);
        scores[name] = parse_first_number(extract_json_path(reply, path));
    }
    return scores;
}

} // namespace persona::providers
