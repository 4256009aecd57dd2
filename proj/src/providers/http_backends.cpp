// SPDX-License-Identifier: Apache-2.0
#include "deepforge/providers/http_backends.hpp"

#include <httplib.h>

#include "deepforge/common/text.hpp"
#include "deepforge/providers/url.hpp"

namespace deepforge {

using nlohmann::json;

namespace {

struct HttpReply {
  int status = 0;
  std::string content_type;
  std::string body;
};

std::unique_ptr<httplib::Client> make_client(const UrlParts& url, double timeout_seconds) {
  auto client = std::make_unique<httplib::Client>(url.origin());
  const auto secs = static_cast<time_t>(timeout_seconds);
  const auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
  client->set_connection_timeout(secs, usecs);
  client->set_read_timeout(secs, usecs);
  client->set_write_timeout(secs, usecs);
  client->set_follow_location(true);
  return client;
}

UrlParts require_url(const std::string& url, const char* what) {
  auto parts = parse_url(url);
  if (!parts) throw PreconditionError(std::string(what) + " is not a valid http(s) URL: '" + url + "'");
  return *parts;
}

HttpReply to_reply(const httplib::Result& res, const std::string& what) {
  if (!res) {
    throw ProviderError("ProviderUnavailable", what + ": " + httplib::to_string(res.error()), true);
  }
  return HttpReply{res->status, res->get_header_value("Content-Type"), res->body};
}

/// Maps service-level HTTP failures to retryable or terminal errors.
void check_service_status(const HttpReply& reply, const std::string& what) {
  if (reply.status >= 200 && reply.status < 300) return;
  const bool transient = reply.status == 429 || reply.status >= 500;
  throw ProviderError("ProviderUnavailable",
                      what + " returned HTTP " + std::to_string(reply.status) + ": " + text::preview(reply.body, 200),
                      transient);
}

json parse_body(const HttpReply& reply, const std::string& what) {
  try {
    return json::parse(reply.body);
  } catch (const json::exception&) {
    throw ProviderError("ProviderUnavailable", what + " returned a non-JSON body", true);
  }
}

}  // namespace

HttpChatBackend::HttpChatBackend(HttpEndpoint endpoint, std::string default_model)
    : endpoint_(std::move(endpoint)), default_model_(std::move(default_model)) {
  require_url(endpoint_.url, "llm.endpoint");
}

ChatResponse HttpChatBackend::complete(const ChatRequest& request) {
  const UrlParts url = require_url(endpoint_.url, "llm.endpoint");
  json messages = json::array();
  for (const auto& m : request.messages) {
    const char* role = m.role == Role::System ? "system" : m.role == Role::Assistant ? "assistant" : "user";
    messages.push_back(json{{"role", role}, {"content", message_text(m)}});
  }
  json body{{"model", request.model.empty() ? default_model_ : request.model},
            {"messages", std::move(messages)},
            {"temperature", request.temperature},
            {"max_tokens", request.max_output_tokens},
            {"seed", request.seed & 0x7fffffffffffffffULL}};
  httplib::Headers headers;
  if (!endpoint_.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint_.api_key);
  auto client = make_client(url, endpoint_.timeout_seconds);
  const HttpReply reply = to_reply(client->Post(url.target, headers, body.dump(), "application/json"), "chat");
  if (reply.status == 400) {
    const std::string lower = text::casefold(reply.body);
    if (text::contains(lower, "context_length") || text::contains(lower, "maximum context") ||
        text::contains(lower, "too many tokens")) {
      throw ProviderError("ContextOverflow", "provider rejected the prompt as too long");
    }
  }
  check_service_status(reply, "chat");
  const json j = parse_body(reply, "chat");
  try {
    const json& choice = j.at("choices").at(0);
    ChatResponse out;
    const json& content = choice.at("message").at("content");
    out.text = content.is_string() ? content.get<std::string>() : std::string();
    const std::string finish = choice.value("finish_reason", "stop");
    out.finish = finish == "length" ? FinishReason::Length : FinishReason::Stop;
    if (finish == "content_filter" || finish == "error") out.finish = FinishReason::Error;
    if (out.finish == FinishReason::Error) out.text.clear();
    return out;
  } catch (const json::exception& e) {
    throw ProviderError("ProviderUnavailable", std::string("chat response missing fields: ") + e.what(), true);
  }
}

HttpSearchBackend::HttpSearchBackend(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  require_url(endpoint_.url, "search.endpoint");
}

std::vector<SearchHit> HttpSearchBackend::search(const std::string& query, int num) {
  const UrlParts url = require_url(endpoint_.url, "search.endpoint");
  httplib::Headers headers;
  if (!endpoint_.api_key.empty()) headers.emplace("X-API-KEY", endpoint_.api_key);
  auto client = make_client(url, endpoint_.timeout_seconds);
  const json body{{"q", query}, {"num", num}};
  const HttpReply reply = to_reply(client->Post(url.target, headers, body.dump(), "application/json"), "search");
  check_service_status(reply, "search");
  const json j = parse_body(reply, "search");
  std::vector<SearchHit> hits;
  if (!j.contains("organic") || !j["organic"].is_array()) return hits;
  for (const auto& item : j["organic"]) {
    if (!item.is_object()) continue;
    SearchHit hit;
    hit.title = item.value("title", "");
    hit.link = item.value("link", "");
    hit.snippet = item.value("snippet", "");
    hit.position = item.value("position", 0);
    hits.push_back(std::move(hit));
  }
  return hits;
}

HttpFetchBackend::HttpFetchBackend(HttpEndpoint proxy) : proxy_(std::move(proxy)) {
  if (!proxy_.url.empty()) require_url(proxy_.url, "fetch.endpoint");
}

FetchedDocument HttpFetchBackend::fetch(const std::string& target) {
  httplib::Headers headers{{"User-Agent", "deepforge/1.0"}, {"Accept", "text/html,text/plain;q=0.9,*/*;q=0.1"}};
  UrlParts url;
  std::string path;
  if (proxy_.url.empty()) {
    url = require_url(target, "fetch target");
    path = url.target;
  } else {
    url = require_url(proxy_.url, "fetch.endpoint");
    path = url.target + (text::contains(url.target, "?") ? "&" : "?") + "url=" + url_encode(target);
    if (!proxy_.api_key.empty()) headers.emplace("X-API-KEY", proxy_.api_key);
  }
  auto client = make_client(url, proxy_.url.empty() ? 30.0 : proxy_.timeout_seconds);
  const HttpReply reply = to_reply(client->Get(path, headers), "fetch " + target);
  return FetchedDocument{reply.status, reply.content_type, reply.body};
}

HttpWikiBackend::HttpWikiBackend(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  require_url(endpoint_.url, "wiki.endpoint");
}

std::optional<WikiArticle> HttpWikiBackend::lookup(const std::string& name) {
  const UrlParts url = require_url(endpoint_.url, "wiki.endpoint");
  const std::string path = url.target + (text::contains(url.target, "?") ? "&" : "?") +
                           "action=query&prop=extracts&explaintext=1&redirects=1&format=json&formatversion=2&titles=" +
                           url_encode(name);
  auto client = make_client(url, endpoint_.timeout_seconds);
  const HttpReply reply = to_reply(client->Get(path, {{"User-Agent", "deepforge/1.0"}}), "wiki");
  check_service_status(reply, "wiki");
  const json j = parse_body(reply, "wiki");
  const json* pages = nullptr;
  if (j.contains("query") && j["query"].contains("pages")) pages = &j["query"]["pages"];
  if (!pages || !pages->is_array() || pages->empty()) return std::nullopt;
  const json& page = (*pages)[0];
  if (page.value("missing", false) || page.value("invalid", false)) return std::nullopt;
  return WikiArticle{page.value("title", name), page.value("extract", "")};
}

}  // namespace deepforge
