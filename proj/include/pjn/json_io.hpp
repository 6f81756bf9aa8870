#pragma once

// JSON views of the library types, used by the CLI reports.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pjn/chains.hpp"
#include "pjn/czdecomp.hpp"
#include "pjn/geometry.hpp"
#include "pjn/oscillation.hpp"
#include "pjn/packing.hpp"
#include "pjn/report.hpp"

namespace pjn {

inline nlohmann::json to_json(const Box& b) { return {{"lo", b.lo}, {"hi", b.hi}}; }

inline nlohmann::json to_json(const ParabolicRectangle& R) {
  return {{"center_x", R.center_x()}, {"center_t", R.center_t()}, {"L", R.edge()}, {"p", R.p()}, {"n", R.n()}};
}

inline nlohmann::json to_json(const OscResult& o) {
  return {{"c_star", o.c_star},
          {"value", o.value},
          {"plus_term", o.plus_term},
          {"minus_term", o.minus_term},
          {"certification", o.exact ? "exact" : "scan-certified"}};
}

inline nlohmann::json to_json(const LogConstant& c) {
  nlohmann::json j{{"log2", json_number(c.log2)}};
  if (auto v = c.value()) j["value"] = json_number(*v);
  else j["value"] = "overflow";
  return j;
}

inline nlohmann::json to_json(const ConstantsReport& c) {
  return {{"m", c.m},           {"c1", to_json(c.c1)}, {"c2", to_json(c.c2)}, {"c3", to_json(c.c3)},
          {"c4", to_json(c.c4)}, {"c5", to_json(c.c5)}, {"A", to_json(c.A)},   {"C", to_json(c.C)}};
}

inline nlohmann::json to_json(const LagChangeConstants& k) {
  auto lc = [](double log2) { return to_json(LogConstant{log2}); };
  return {{"B", lc(k.log2_B)},
          {"B_minus", lc(k.log2_B_minus)},
          {"C_large_lambda", lc(k.log2_C_large)},
          {"C_small_lambda", lc(k.log2_C_small)},
          {"C_small_lambda_minus", lc(k.log2_C_small_minus)},
          {"C", lc(k.log2_C)}};
}

inline nlohmann::json packing_json(const JnResult& r, const std::vector<ParabolicRectangle>& cands) {
  nlohmann::json rects = nlohmann::json::array();
  for (std::size_t k = 0; k < r.packing.indices.size(); ++k) {
    const auto i = r.packing.indices[k];
    rects.push_back({{"index", i}, {"rectangle", to_json(cands[i])}, {"weight", r.packing.weights[k]}});
  }
  return {{"norm", r.norm},
          {"total", r.packing.total},
          {"mode", to_string(r.mode)},
          {"candidate_count", r.candidate_count},
          {"packing", rects}};
}

inline nlohmann::json to_json(const CZSelection& sel, bool with_nodes) {
  nlohmann::json j{{"m", sel.m},
                   {"lambda", sel.lambda},
                   {"c_R0", sel.c_R0},
                   {"R0", to_json(sel.R0)},
                   {"node_count", sel.nodes.size()},
                   {"selected_count", sel.selected.size()},
                   {"kept_minus_count", sel.kept_minus.size()},
                   {"selected_measure", sel.selected_measure}};
  nlohmann::json sel_boxes = nlohmann::json::array();
  for (int id : sel.selected) {
    const CZNode& n = sel.nodes[static_cast<std::size_t>(id)];
    sel_boxes.push_back({{"id", id}, {"level", n.level}, {"box", to_json(n.box)}, {"c_R", n.c_R}});
  }
  j["selected"] = sel_boxes;
  j["kept_minus"] = sel.kept_minus;
  if (with_nodes) {
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t k = 0; k < sel.nodes.size(); ++k) {
      const CZNode& n = sel.nodes[k];
      nodes.push_back({{"id", k},
                       {"parent", n.parent},
                       {"level", n.level},
                       {"box", to_json(n.box)},
                       {"rectangle", to_json(n.assoc)},
                       {"c_R", n.c_R},
                       {"selected", n.selected},
                       {"subdivided", n.subdivided}});
    }
    j["nodes"] = nodes;
  }
  return j;
}

/// A chain with its bookkeeping; long rectangle lists keep the first and last
/// `edge_items` entries unless `full` is set.
inline nlohmann::json to_json(const Chain& ch, bool full, std::size_t edge_items = 8) {
  nlohmann::json rects = nlohmann::json::array();
  const std::uint64_t len = ch.length();
  const bool truncate = !full && len > 2 * edge_items;
  for (std::uint64_t k = 0; k < len; ++k) {
    if (truncate && k >= edge_items && k + edge_items < len) continue;
    rects.push_back({{"k", k}, {"rectangle", to_json(ch.rect(k))}});
  }
  return {{"source", {{"i", ch.i}, {"j", ch.j}}},
          {"m", ch.m},
          {"l", ch.l},
          {"theta", ch.spatial.theta},
          {"b", ch.spatial.b},
          {"N_i", ch.spatial.N_i},
          {"N", ch.N},
          {"M", ch.M},
          {"beta", ch.beta},
          {"xi", ch.xi},
          {"tau", ch.tau},
          {"length", len},
          {"spatial_overlap", ch.spatial.overlap},
          {"rectangles_truncated", truncate},
          {"rectangles", rects}};
}

}  // namespace pjn
