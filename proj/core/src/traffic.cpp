#include "petc/traffic.hpp"

#include <json.hpp>

#include <algorithm>

namespace petc {

TrafficModel build_quotient(const RegionSpec& spec,
                            std::vector<Edge> trigger_edges,
                            std::vector<Edge> early_edges, int loop_id,
                            Rational h) {
  TrafficModel m;
  m.loop_id = loop_id;
  m.k_min = spec.k_min;
  m.k_max = spec.k_max;
  m.h = h;

  auto in_range = [&](int v) { return v >= m.k_min && v <= m.k_max; };
  for (const auto& e : trigger_edges) {
    if (!in_range(e.source) || !in_range(e.target) || e.k != e.source)
      throw std::invalid_argument("malformed trigger edge");
  }
  for (const auto& e : early_edges) {
    if (!in_range(e.source) || !in_range(e.target) || e.k < 1 ||
        e.k >= e.source)
      throw std::invalid_argument("malformed early edge");
  }

  std::vector<bool> has_out(m.region_count(), false);
  for (const auto& e : trigger_edges) has_out[e.source - m.k_min] = true;
  for (int q = m.k_min; q <= m.k_max; ++q)
    if (!has_out[q - m.k_min])
      throw abstraction_error("region " + std::to_string(q) +
                              " has no trigger successor");

  auto order = [](const Edge& a, const Edge& b) {
    return std::tie(a.source, a.k, a.target) <
           std::tie(b.source, b.k, b.target);
  };
  std::sort(trigger_edges.begin(), trigger_edges.end(), order);
  std::sort(early_edges.begin(), early_edges.end(), order);
  m.trigger_edges = std::move(trigger_edges);
  m.early_edges = std::move(early_edges);
  return m;
}

TrafficTGA build_tga(const TrafficModel& model) {
  TrafficTGA tga;
  tga.loop_id = model.loop_id;
  tga.k_min = model.k_min;
  tga.k_max = model.k_max;
  tga.h = model.h;
  tga.edges.reserve(model.trigger_edges.size() + model.early_edges.size());
  for (const auto& e : model.trigger_edges)
    tga.edges.push_back({e.source, e.source, e.target, false});
  for (const auto& e : model.early_edges)
    tga.edges.push_back({e.source, e.k, e.target, true});
  return tga;
}

void dump_traffic_json(std::ostream& out, const TrafficModel& model) {
  nlohmann::json j;
  j["loop_id"] = model.loop_id;
  j["k_min"] = model.k_min;
  j["k_max"] = model.k_max;
  j["h"] = format_rational(model.h);
  auto edges = [](const std::vector<Edge>& es) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : es)
      arr.push_back({{"source", e.source},
                     {"k", e.k},
                     {"target", e.target},
                     {"verdict", e.status == FeasStatus::Feasible
                                     ? "feasible"
                                     : "unknown"},
                     {"residual", e.residual}});
    return arr;
  };
  j["trigger_edges"] = edges(model.trigger_edges);
  j["early_edges"] = edges(model.early_edges);
  out << j.dump(2) << '\n';
}

TrafficModel load_traffic_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument(std::string("model file is not json: ") +
                                ex.what());
  }
  TrafficModel m;
  try {
    m.loop_id = j.at("loop_id").get<int>();
    m.k_min = j.at("k_min").get<int>();
    m.k_max = j.at("k_max").get<int>();
    m.h = parse_rational(j.at("h").get<std::string>());
    auto edges = [](const nlohmann::json& arr) {
      std::vector<Edge> es;
      for (const auto& e : arr) {
        Edge edge;
        edge.source = e.at("source").get<int>();
        edge.k = e.at("k").get<int>();
        edge.target = e.at("target").get<int>();
        edge.status = e.at("verdict").get<std::string>() == "feasible"
                          ? FeasStatus::Feasible
                          : FeasStatus::Unknown;
        edge.residual = e.at("residual").get<double>();
        es.push_back(edge);
      }
      return es;
    };
    m.trigger_edges = edges(j.at("trigger_edges"));
    m.early_edges = edges(j.at("early_edges"));
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument(std::string("model file field: ") + ex.what());
  }
  if (m.k_min < 1 || m.k_max < m.k_min)
    throw std::invalid_argument("model file has bad region bounds");
  auto in_range = [&](int v) { return v >= m.k_min && v <= m.k_max; };
  for (const auto& e : m.trigger_edges)
    if (!in_range(e.source) || !in_range(e.target) || e.k != e.source)
      throw std::invalid_argument("model file has a malformed trigger edge");
  for (const auto& e : m.early_edges)
    if (!in_range(e.source) || !in_range(e.target) || e.k < 1 ||
        e.k >= e.source)
      throw std::invalid_argument("model file has a malformed early edge");
  return m;
}

}  // namespace petc
