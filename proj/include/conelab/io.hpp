#pragma once

#include <string>

#include "conelab/contact.hpp"
#include "conelab/field.hpp"

namespace conelab {

// Flat binary field container, little-endian:
//   magic "CLAB" | u32 version (=1) | u32 dim | u32 n_pts per axis |
//   f64 lo per axis | f64 hi per axis | f64 values row-major.
void write_field(const ScalarField& u, const std::string& path);
ScalarField read_field(const std::string& path);

// CSV export, one row per node: x1[,x2],value. Deterministic formatting.
void write_field_csv(const ScalarField& u, const std::string& path);

// (x[,y], K_star, g, censored) over the evaluated region.
void write_opening_csv(const OpeningField& of, const std::string& path);

// (k, t_k, measure, in_fit_window)
void write_decay_csv(const DecayCurve& dc, const std::string& path);

// Shortest round-trippable formatting used by every CSV/JSON writer.
std::string format_double(double x);

}  // namespace conelab
