#include "bitml/liquidity.hpp"

#include <sstream>

namespace bitml {

using nlohmann::json;

namespace {

OriginVerdict::Status parse_status(const std::string& s) {
  for (auto st : {OriginVerdict::Status::Liquid, OriginVerdict::Status::NotVerified,
                  OriginVerdict::Status::EmptyStuck})
    if (status_string(st) == s) return st;
  throw Error("unknown verdict status: " + s);
}

}  // namespace

json verdict_to_json(const Verdict& v) {
  json j;
  j["contract"] = v.contract;
  j["observers"] = v.observers;
  j["liquid"] = v.liquid;
  j["states"] = v.states;
  j["edges"] = v.edges;
  j["max_liquidation"] = v.max_liquidation;
  j["details"] = json::array();
  for (const auto& d : v.details) {
    json e;
    e["origin"] = d.origin;
    e["status"] = status_string(d.status);
    if (d.witness) {
      e["witness"] = json::array();
      for (const auto& w : *d.witness) e["witness"].push_back({{"state", w.state}, {"label", w.label}});
    } else {
      e["witness"] = nullptr;
    }
    e["stuck_term"] = d.stuck_term ? json(*d.stuck_term) : json(nullptr);
    e["stuck_state"] = d.stuck_state ? json(*d.stuck_state) : json(nullptr);
    j["details"].push_back(std::move(e));
  }
  return j;
}

Verdict verdict_from_json(const json& j) {
  Verdict v;
  v.contract = j.at("contract").get<std::string>();
  v.observers = j.at("observers").get<std::vector<std::string>>();
  v.liquid = j.at("liquid").get<bool>();
  v.states = j.at("states").get<std::size_t>();
  v.edges = j.value("edges", std::size_t{0});
  v.max_liquidation = j.value("max_liquidation", std::size_t{0});
  for (const auto& e : j.at("details")) {
    OriginVerdict d;
    d.origin = e.at("origin").get<std::string>();
    d.status = parse_status(e.at("status").get<std::string>());
    if (!e.at("witness").is_null()) {
      std::vector<WitnessStep> w;
      for (const auto& s : e.at("witness"))
        w.push_back({s.at("state").get<std::size_t>(), s.at("label").get<std::string>()});
      d.witness = std::move(w);
    }
    if (!e.at("stuck_term").is_null()) d.stuck_term = e.at("stuck_term").get<std::string>();
    if (e.contains("stuck_state") && !e.at("stuck_state").is_null())
      d.stuck_state = e.at("stuck_state").get<std::size_t>();
    v.details.push_back(std::move(d));
  }
  return v;
}

std::string explain(const Verdict& v) {
  std::ostringstream os;
  os << "contract: " << v.contract << "\n";
  os << "observers: ";
  for (std::size_t i = 0; i < v.observers.size(); ++i) os << (i ? "," : "") << v.observers[i];
  os << "\n";
  os << "states: " << v.states << " (edges: " << v.edges << ")\n";
  os << "verdict: "
     << (v.liquid ? "liquid" : status_string(OriginVerdict::Status::NotVerified)) << "\n";
  if (v.liquid) os << "max liquidation path: " << v.max_liquidation << "\n";
  for (const auto& d : v.details) {
    os << "origin " << d.origin << ": " << status_string(d.status) << "\n";
    if (d.witness) {
      os << "  path to state " << (d.stuck_state ? std::to_string(*d.stuck_state) : "?")
         << (d.witness->empty() ? " (initial state)" : "") << "\n";
      for (const auto& w : *d.witness) os << "    state " << w.state << ": " << w.label << "\n";
    }
    if (d.stuck_term) os << "  stuck term: " << *d.stuck_term << "\n";
  }
  return os.str();
}

json states_to_json(const StateSpace& space) {
  json j;
  j["states"] = json::array();
  j["edges"] = json::array();
  for (std::size_t i = 0; i < space.states.size(); ++i) {
    j["states"].push_back(
        {{"id", i}, {"canonical", space.canon[i].text}, {"tokens", space.canon[i].tokens}});
    for (const auto& e : space.edges[i])
      j["edges"].push_back({{"from", i},
                            {"label", {{"target_slot", e.target_slot}, {"starred", e.label.starred}}},
                            {"to", e.to}});
  }
  return j;
}

}  // namespace bitml
