#pragma once

#include "petc/game.hpp"

namespace petc {

// UPPAAL 4.x / Tiga XML network: one template per loop (locations Q_k with
// invariant c <= k*scale, controller-owned early edges, plant-owned trigger
// edges marked controllable="false"), the shared-channel template, a
// broadcast channel `up` tying every communication together, and a bounded
// integer e clamped by a declared update function on every loop edge.
// Clock unit is the base tick.
void export_uppaal(std::ostream& out, const std::vector<TrafficModel>& models,
                   const NetworkTGA& net, const EarlinessParams& params,
                   Rational base_tick);

}  // namespace petc
