#pragma once

#include "netsemi/matrix.hpp"
#include "netsemi/state.hpp"

#include <cstdio>
#include <ostream>
#include <string>

namespace netsemi {

/// Round-trip-safe text with 17 significant digits; negative zero prints as 0.
inline std::string format_number(double v)
{
    if (v == 0.0) v = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Header `edge_kind,edge_index,x,value`, one row per sample, edges in u, v, w order.
inline void write_real_csv(std::ostream& os, const SampledState<double>& s)
{
    os << "edge_kind,edge_index,x,value\n";
    for (auto k : kAllKinds) {
        const auto& edges = s.of(k);
        for (std::size_t j = 0; j < edges.size(); ++j) {
            for (std::size_t i = 0; i < edges[j].x.size(); ++i) {
                os << to_string(k) << ',' << j << ',' << format_number(edges[j].x[i]) << ','
                   << format_number(edges[j].values[i]) << '\n';
            }
        }
    }
}

/// Header `edge_kind,edge_index,x,re,im`.
inline void write_complex_csv(std::ostream& os, const SampledState<Complex>& s)
{
    os << "edge_kind,edge_index,x,re,im\n";
    for (auto k : kAllKinds) {
        const auto& edges = s.of(k);
        for (std::size_t j = 0; j < edges.size(); ++j) {
            for (std::size_t i = 0; i < edges[j].x.size(); ++i) {
                os << to_string(k) << ',' << j << ',' << format_number(edges[j].x[i]) << ','
                   << format_number(edges[j].values[i].real()) << ',' << format_number(edges[j].values[i].imag())
                   << '\n';
            }
        }
    }
}

} // namespace netsemi
