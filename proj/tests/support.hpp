#pragma once

#include <array>
#include <string>

#include "fluxrelax/analysis.hpp"
#include "fluxrelax/io.hpp"

namespace testing {

struct TableRow {
  const char* id;
  double ej, ec, el;     // GHz
  double omega_res;      // GHz
  double g, kappa;       // MHz
  double chi01;          // MHz
  double omega01;        // GHz
  double sqrt_a;         // uPhi0 / sqrt(Hz)
  double qc_mean;
};

inline constexpr std::array<TableRow, 8> kTable = {{
    {"A1", 3.54, 1.05, 0.53, 7.090, 124, 0.25, 1.44, 0.362, 10.4, 2.32e5},
    {"A2", 3.94, 1.04, 0.53, 7.182, 124, 0.17, 1.63, 0.279, 5.3, 2.68e5},
    {"A3", 4.38, 1.02, 0.53, 7.273, 123, 0.34, 1.80, 0.214, 4.3, 2.17e5},
    {"A4", 5.41, 1.00, 0.53, 7.297, 124, 0.27, 2.29, 0.115, 6.4, 1.75e5},
    {"A5", 7.11, 0.95, 0.53, 7.500, 120, 0.60, 2.20, 0.042, 2.4, 1.16e5},
    {"B1", 3.15, 1.04, 0.50, 7.039, 118, 0.29, 1.11, 0.427, 5.2, 3.11e5},
    {"B2", 3.52, 1.04, 0.51, 7.126, 120, 0.30, 1.30, 0.343, 5.7, 2.10e5},
    {"B3", 3.81, 1.03, 0.50, 7.229, 120, 0.35, 1.39, 0.284, 4.3, 2.81e5},
}};

inline const TableRow& row(const std::string& id) {
  for (const auto& r : kTable) {
    if (id == r.id) return r;
  }
  throw std::out_of_range(id);
}

inline fluxrelax::DeviceModel device(const TableRow& r) {
  fluxrelax::DeviceModel d;
  d.qubit_id = r.id;
  d.process_label = std::string(1, r.id[0]);
  d.params = {r.ej * 1e9, r.ec * 1e9, r.el * 1e9};
  d.res = {r.omega_res * 1e9, r.g * 1e6, r.kappa * 1e6, 50.0};
  d.env.a_phi = r.sqrt_a * 1e-6 * r.sqrt_a * 1e-6;
  d.env.qc_eff = r.qc_mean;
  return d;
}

inline fluxrelax::DeviceModel device(const std::string& id) { return device(row(id)); }

inline std::string data_path(const std::string& rel) { return std::string(FLUXRELAX_DATA_DIR) + "/" + rel; }

}  // namespace testing
