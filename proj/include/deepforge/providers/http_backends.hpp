// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "deepforge/providers/chat.hpp"
#include "deepforge/providers/fetch.hpp"
#include "deepforge/providers/search.hpp"
#include "deepforge/providers/wiki.hpp"

namespace deepforge {

struct HttpEndpoint {
  std::string url;  // absolute http(s) URL
  std::string api_key;
  double timeout_seconds = 60.0;
};

/// OpenAI-compatible chat completions. Tool turns are sent as user messages
/// (the protocol appends tool responses to the user side of the context).
class HttpChatBackend : public ChatBackend {
 public:
  HttpChatBackend(HttpEndpoint endpoint, std::string default_model);
  ChatResponse complete(const ChatRequest& request) override;

 private:
  HttpEndpoint endpoint_;
  std::string default_model_;
};

/// Serper-style search: POST {"q", "num"} with an X-API-KEY header; hits are
/// read from "organic".
class HttpSearchBackend : public SearchBackend {
 public:
  explicit HttpSearchBackend(HttpEndpoint endpoint);
  std::vector<SearchHit> search(const std::string& query, int num) override;

 private:
  HttpEndpoint endpoint_;
};

/// Direct GET (following redirects), or GET <endpoint>?url=<target> through a
/// fetch service when an endpoint is configured.
class HttpFetchBackend : public FetchBackend {
 public:
  explicit HttpFetchBackend(HttpEndpoint proxy = {});
  FetchedDocument fetch(const std::string& url) override;

 private:
  HttpEndpoint proxy_;
};

/// MediaWiki action API, plain-text extracts.
class HttpWikiBackend : public WikiBackend {
 public:
  explicit HttpWikiBackend(HttpEndpoint endpoint);
  std::optional<WikiArticle> lookup(const std::string& name) override;

 private:
  HttpEndpoint endpoint_;
};

}  // namespace deepforge
