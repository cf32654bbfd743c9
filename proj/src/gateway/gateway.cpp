#include "cbdc/gateway/gateway.hpp"

#include <regex>

#include "httplib.h"

namespace cbdc::gateway {
namespace {

const std::regex kWalletRoute(R"(^/wallets/([^/]+)/(balance|withdraw|pay)$)");
const std::regex kMerchantRoute(R"(^/merchants/([^/]+)/(invoices|deposit)$)");

Response error_response(ErrorCode code, const std::string& message) {
  return Response{status_for(code), Json{{"error_code", error_code_name(code)}, {"message", message}}};
}

}  // namespace

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownActor:
      return 404;
    case ErrorCode::InvalidArgument:
    case ErrorCode::ConfigInvalid:
    case ErrorCode::UnknownFaultKind:
      return 400;
    case ErrorCode::AlreadySpent:
      return 409;
    default:
      return 422;
  }
}

Gateway::~Gateway() { stop_autotick(); }

Response Gateway::handle(const std::string& method, const std::string& path, const std::string& body) {
  Json parsed = Json::object();
  if (!body.empty()) {
    parsed = Json::parse(body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object())
      return error_response(ErrorCode::InvalidArgument, "request body must be a JSON object");
  }
  std::lock_guard lock(mutex_);
  try {
    return dispatch(method, path, parsed);
  } catch (const ProtocolError& e) {
    return error_response(e.code(), e.what());
  } catch (const Json::exception& e) {
    return error_response(ErrorCode::InvalidArgument, e.what());
  }
}

Response Gateway::dispatch(const std::string& method, const std::string& path, const Json& body) {
  std::smatch m;
  if (std::regex_match(path, m, kWalletRoute)) {
    const std::string id = m[1], what = m[2];
    if (what == "balance" && method == "GET") return {200, harness_.wallet_balance(id)};
    if (what == "withdraw" && method == "POST") return {200, harness_.perform(id, "withdraw", body)};
    if (what == "pay" && method == "POST") return {200, harness_.perform(id, "pay", body)};
  } else if (std::regex_match(path, m, kMerchantRoute)) {
    const std::string id = m[1], what = m[2];
    if (what == "invoices" && method == "POST") return {200, harness_.perform(id, "invoice", body)};
    if (what == "deposit" && method == "POST") return {200, harness_.perform(id, "deposit", Json::object())};
  } else if (path == "/ledger/head" && method == "GET") {
    return {200, harness_.ledger_head()};
  } else if (path == "/mint/stats" && method == "GET") {
    return {200, harness_.mint_stats()};
  } else if (path == "/sim/step" && method == "POST") {
    const Json ticks = body.contains("ticks") ? body.at("ticks") : Json(1);
    if (!ticks.is_number_integer()) fail(ErrorCode::InvalidArgument, "'ticks' must be an integer");
    return {200, Json{{"tick", harness_.step(ticks.get<Tick>())}}};
  } else if (path == "/sim/report" && method == "GET") {
    return {200, harness_.report()};
  }
  return Response{404, Json{{"error_code", "NotFound"}, {"message", method + " " + path + " is not an endpoint"}}};
}

void Gateway::mount(httplib::Server& server) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    Response r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get(".*", route);
  server.Post(".*", route);
}

void Gateway::start_autotick(std::chrono::milliseconds period) {
  stop_autotick();
  ticking_ = true;
  ticker_ = std::thread([this, period] {
    while (ticking_) {
      std::this_thread::sleep_for(period);
      if (!ticking_) break;
      std::lock_guard lock(mutex_);
      harness_.step(1);
    }
  });
}

void Gateway::stop_autotick() {
  ticking_ = false;
  if (ticker_.joinable()) ticker_.join();
}

void serve(sim::Harness& harness, const std::string& host, int port, int autotick_ms) {
  Gateway gateway(harness);
  httplib::Server server;
  gateway.mount(server);
  if (!server.bind_to_port(host, port)) fail(ErrorCode::InvalidArgument, "cannot bind " + host + ":" + std::to_string(port));
  if (autotick_ms > 0) gateway.start_autotick(std::chrono::milliseconds(autotick_ms));
  server.listen_after_bind();
}

}  // namespace cbdc::gateway
