#include <httplib.h>

#include <json.hpp>

#include "halueval/error.hpp"
#include "halueval/score.hpp"

namespace halueval {

namespace {

using json = nlohmann::json;

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string base;    // path prefix without trailing '/'
};

Endpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
    throw Error(Errc::Config, "endpoint must be an http:// URL", url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) e.base = url.substr(path_start);
  while (!e.base.empty() && e.base.back() == '/') e.base.pop_back();
  if (e.origin.size() <= scheme_end + 3) throw Error(Errc::Config, "endpoint has no host", url);
  return e;
}

httplib::Client make_client(const Endpoint& e, std::chrono::milliseconds timeout) {
  httplib::Client cli(e.origin);
  const auto sec = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usec = std::chrono::duration_cast<std::chrono::microseconds>(timeout - sec);
  cli.set_connection_timeout(sec.count(), usec.count());
  cli.set_read_timeout(sec.count(), usec.count());
  cli.set_write_timeout(sec.count(), usec.count());
  return cli;
}

[[noreturn]] void transport_error(httplib::Error err, const std::string& chunk) {
  const auto what = httplib::to_string(err);
  switch (err) {
    case httplib::Error::ConnectionTimeout:
    case httplib::Error::Read:
    case httplib::Error::Write:
      throw Error(Errc::Timeout, what, chunk);
    default:
      throw Error(Errc::Unreachable, what, chunk);
  }
}

std::string chunk_name(std::size_t index, std::size_t first, std::size_t count) {
  return "chunk " + std::to_string(index) + ", requests " + std::to_string(first) + ".." +
         std::to_string(first + count - 1);
}

}  // namespace

std::vector<double> remote_score_batch(const RemoteOptions& options,
                                       std::span<const ScoreRequest> requests) {
  if (options.batch_size == 0) throw Error(Errc::InvalidArgument, "batch_size must be >= 1");
  const auto endpoint = parse_endpoint(options.endpoint);
  auto cli = make_client(endpoint, options.timeout);

  std::vector<double> out;
  out.reserve(requests.size());
  for (std::size_t first = 0, index = 0; first < requests.size();
       first += options.batch_size, ++index) {
    const auto chunk = requests.subspan(first, std::min(options.batch_size, requests.size() - first));
    const auto name = chunk_name(index, first, chunk.size());

    json body;
    body["pairs"] = json::array();
    for (const auto& r : chunk) {
      body["pairs"].push_back({{"premise", r.premise}, {"hypothesis", r.hypothesis}});
    }
    auto res = cli.Post(endpoint.base + "/v1/score", body.dump(), "application/json");
    if (!res) transport_error(res.error(), name);
    if (res->status != 200) {
      throw Error(Errc::MalformedResponse, "HTTP status " + std::to_string(res->status), name);
    }

    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw Error(Errc::MalformedResponse, e.what(), name);
    }
    if (!reply.is_object() || !reply.contains("scores") || !reply["scores"].is_array()) {
      throw Error(Errc::MalformedResponse, "missing 'scores' array", name);
    }
    const auto& scores = reply["scores"];
    if (scores.size() != chunk.size()) {
      throw Error(Errc::MalformedResponse,
                  "expected " + std::to_string(chunk.size()) + " scores, got " +
                      std::to_string(scores.size()),
                  name);
    }
    for (const auto& s : scores) {
      if (!s.is_number()) throw Error(Errc::MalformedResponse, "non-numeric score", name);
      const double v = s.get<double>();
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(Errc::OutOfRangeScore, "score " + s.dump() + " outside [0, 1]", name);
      }
      out.push_back(v);
    }
  }
  return out;
}

bool remote_healthy(const RemoteOptions& options) {
  const auto endpoint = parse_endpoint(options.endpoint);
  auto cli = make_client(endpoint, options.timeout);
  auto res = cli.Get(endpoint.base + "/healthz");
  return res && res->status == 200 && res->body == "ok";
}

RemoteScorer::RemoteScorer(RemoteOptions options) : options_(std::move(options)) {
  if (options_.batch_size == 0) throw Error(Errc::Config, "batch_size must be >= 1");
  parse_endpoint(options_.endpoint);
}

}  // namespace halueval
