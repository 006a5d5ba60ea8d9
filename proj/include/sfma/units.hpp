// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

namespace sfma {

// All internal quantities are linear SI (W, Hz, s, J, bits). dB/dBm appear
// only at configuration boundaries; these helpers are the boundary.

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace sfma
