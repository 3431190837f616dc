#include "petc/uppaal.hpp"

#include <ostream>
#include <sstream>
#include <stdexcept>

namespace petc {

namespace {

std::string bump_expr(int d) {
  std::ostringstream s;
  s << "e := clamp(e";
  if (d >= 0)
    s << " + " << d;
  else
    s << " - " << -d;
  s << ")";
  return s.str();
}

std::string loc_id(int loop, int region) {
  std::ostringstream s;
  s << "l" << loop << "_" << region;
  return s.str();
}

}  // namespace

void export_uppaal(std::ostream& out, const std::vector<TrafficModel>& models,
                   const NetworkTGA& net, const EarlinessParams& params,
                   Rational base_tick) {
  if (models.empty()) throw std::invalid_argument("no traffic models");
  params.validate();
  if (net.delta < 1) throw std::invalid_argument("delta must be >= 1");

  out << "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n";
  out << "<!DOCTYPE nta PUBLIC '-//Uppaal Team//DTD Flat System 1.1//EN' "
         "'http://www.it.uu.se/research/group/darts/uppaal/flat-1_1.dtd'>\n";
  out << "<nta>\n";

  // globals: the broadcast channel every communication synchronises on, the
  // saturating earliness counter, and its clamp. Clock unit is one base tick.
  out << "  <declaration>broadcast chan up;\n";
  out << "const int E = " << params.E << ";\n";
  out << "int[0," << params.E << "] e = 0;\n";
  out << "int clamp(int v) { if (v &lt; 0) return 0; if (v &gt; E) return E; "
         "return v; }</declaration>\n";

  for (const auto& model : models) {
    std::int64_t scale = rational_ratio(model.h, base_tick);
    out << "  <template>\n";
    out << "    <name>Loop" << model.loop_id << "</name>\n";
    out << "    <declaration>clock c;</declaration>\n";
    for (int q = model.k_min; q <= model.k_max; ++q) {
      int x = (q - model.k_min) * 160;
      out << "    <location id=\"" << loc_id(model.loop_id, q) << "\" x=\""
          << x << "\" y=\"0\">\n";
      out << "      <name>Q" << q << "</name>\n";
      out << "      <label kind=\"invariant\">c &lt;= " << q * scale
          << "</label>\n";
      out << "    </location>\n";
    }
    // UPPAAL wants a single initial location; the earliest region is the
    // only choice that never violates its own invariant at time 0
    out << "    <init ref=\"" << loc_id(model.loop_id, model.k_min)
        << "\"/>\n";
    for (const auto& edge : model.trigger_edges) {
      out << "    <transition controllable=\"false\">\n";
      out << "      <source ref=\"" << loc_id(model.loop_id, edge.source)
          << "\"/>\n";
      out << "      <target ref=\"" << loc_id(model.loop_id, edge.target)
          << "\"/>\n";
      out << "      <label kind=\"guard\">c == " << edge.source * scale
          << "</label>\n";
      out << "      <label kind=\"synchronisation\">up!</label>\n";
      out << "      <label kind=\"assignment\">c := 0, "
          << bump_expr(-params.e_ref) << "</label>\n";
      out << "    </transition>\n";
    }
    for (const auto& edge : model.early_edges) {
      int d = params.r * (edge.source - edge.k) - params.e_ref;
      out << "    <transition controllable=\"true\">\n";
      out << "      <source ref=\"" << loc_id(model.loop_id, edge.source)
          << "\"/>\n";
      out << "      <target ref=\"" << loc_id(model.loop_id, edge.target)
          << "\"/>\n";
      out << "      <label kind=\"guard\">c == " << edge.k * scale
          << "</label>\n";
      out << "      <label kind=\"synchronisation\">up!</label>\n";
      out << "      <label kind=\"assignment\">c := 0, " << bump_expr(d)
          << "</label>\n";
      out << "    </transition>\n";
    }
    out << "  </template>\n";
  }

  // shared channel: occupied for delta base ticks after any communication,
  // a second one inside the window is the losing sink
  out << "  <template>\n";
  out << "    <name>Network</name>\n";
  out << "    <declaration>clock cN;</declaration>\n";
  out << "    <location id=\"n_idle\" x=\"0\" y=\"0\">\n";
  out << "      <name>Idle</name>\n";
  out << "    </location>\n";
  out << "    <location id=\"n_inuse\" x=\"160\" y=\"0\">\n";
  out << "      <name>InUse</name>\n";
  out << "      <label kind=\"invariant\">cN &lt;= " << net.delta
      << "</label>\n";
  out << "    </location>\n";
  out << "    <location id=\"n_bad\" x=\"320\" y=\"0\">\n";
  out << "      <name>Bad</name>\n";
  out << "    </location>\n";
  out << "    <init ref=\"n_idle\"/>\n";
  out << "    <transition controllable=\"false\">\n";
  out << "      <source ref=\"n_idle\"/>\n";
  out << "      <target ref=\"n_inuse\"/>\n";
  out << "      <label kind=\"synchronisation\">up?</label>\n";
  out << "      <label kind=\"assignment\">cN := 0</label>\n";
  out << "    </transition>\n";
  out << "    <transition controllable=\"false\">\n";
  out << "      <source ref=\"n_inuse\"/>\n";
  out << "      <target ref=\"n_idle\"/>\n";
  out << "      <label kind=\"guard\">cN == " << net.delta << "</label>\n";
  out << "    </transition>\n";
  out << "    <transition controllable=\"false\">\n";
  out << "      <source ref=\"n_inuse\"/>\n";
  out << "      <target ref=\"n_bad\"/>\n";
  out << "      <label kind=\"synchronisation\">up?</label>\n";
  out << "    </transition>\n";
  out << "    <transition controllable=\"false\">\n";
  out << "      <source ref=\"n_bad\"/>\n";
  out << "      <target ref=\"n_bad\"/>\n";
  out << "      <label kind=\"synchronisation\">up?</label>\n";
  out << "    </transition>\n";
  out << "  </template>\n";

  out << "  <system>system ";
  for (const auto& model : models) out << "Loop" << model.loop_id << ", ";
  out << "Network;</system>\n";
  out << "</nta>\n";
}

}  // namespace petc
