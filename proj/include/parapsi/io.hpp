#pragma once

// Binary persistence for fields and kernel slices: an 8-byte little-endian
// header length, a JSON header, then the sample values as interleaved
// re/im little-endian float64. Slice headers carry {d,L,N,t,s,epsilon,m,alpha};
// field headers carry the grid and layout.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "grid.hpp"
#include "kernel.hpp"

namespace parapsi {

static_assert(std::endian::native == std::endian::little,
              "binary field format assumes a little-endian host");

namespace detail {

inline void write_blob(std::ostream& os, const nlohmann::json& header,
                       const std::vector<cplx>& values) {
    const std::string htext = header.dump();
    const std::uint64_t hlen = htext.size();
    os.write(reinterpret_cast<const char*>(&hlen), 8);
    os.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    os.write(reinterpret_cast<const char*>(values.data()),
             static_cast<std::streamsize>(values.size() * sizeof(cplx)));
    if (!os) throw input_error("binary write failed");
}

inline nlohmann::json read_blob(std::istream& is, std::vector<cplx>& values,
                                std::size_t expected) {
    std::uint64_t hlen = 0;
    is.read(reinterpret_cast<char*>(&hlen), 8);
    if (!is || hlen > (1u << 20)) throw input_error("binary read: bad header length");
    std::string htext(hlen, '\0');
    is.read(htext.data(), static_cast<std::streamsize>(hlen));
    nlohmann::json header = nlohmann::json::parse(htext);
    values.resize(expected);
    is.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(expected * sizeof(cplx)));
    if (!is) throw input_error("binary read: truncated payload");
    return header;
}

}  // namespace detail

inline void write_slice_binary(const std::string& path, const KernelSlice& s) {
    nlohmann::json h{{"kind", "slice"},
                     {"d", s.grid.d},
                     {"L", s.grid.L},
                     {"N", s.grid.N},
                     {"t", s.t},
                     {"s", s.s},
                     {"epsilon", s.epsilon},
                     {"m", s.m},
                     {"alpha", {s.alpha[0], s.alpha[1]}}};
    std::ofstream os(path, std::ios::binary);
    if (!os) throw input_error("cannot open for writing: " + path);
    detail::write_blob(os, h, s.values);
}

inline KernelSlice read_slice_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw input_error("cannot open for reading: " + path);
    std::uint64_t hlen = 0;
    is.read(reinterpret_cast<char*>(&hlen), 8);
    if (!is || hlen > (1u << 20)) throw input_error("binary read: bad header length");
    std::string htext(hlen, '\0');
    is.read(htext.data(), static_cast<std::streamsize>(hlen));
    const nlohmann::json h = nlohmann::json::parse(htext);
    if (h.value("kind", "") != "slice") throw input_error("not a slice file: " + path);
    KernelSlice s;
    s.grid.d = h.at("d").get<int>();
    s.grid.L = h.at("L").get<double>();
    s.grid.N = h.at("N").get<int>();
    s.grid.T = 1.0;
    s.grid.Nt = 1;
    s.t = h.at("t").get<double>();
    s.s = h.at("s").get<double>();
    s.epsilon = h.at("epsilon").get<double>();
    s.m = h.at("m").get<int>();
    s.alpha = {h.at("alpha")[0].get<int>(), h.at("alpha")[1].get<int>()};
    s.values.resize(static_cast<std::size_t>(s.grid.space_size()));
    is.read(reinterpret_cast<char*>(s.values.data()),
            static_cast<std::streamsize>(s.values.size() * sizeof(cplx)));
    if (!is) throw input_error("binary read: truncated payload");
    return s;
}

inline void write_field_binary(const std::string& path, const Field& f) {
    nlohmann::json h{{"kind", "field"},
                     {"d", f.grid.d},
                     {"L", f.grid.L},
                     {"N", f.grid.N},
                     {"T", f.grid.T},
                     {"Nt", f.grid.Nt},
                     {"layout", f.layout == FieldLayout::spacetime ? "spacetime" : "slice"}};
    std::ofstream os(path, std::ios::binary);
    if (!os) throw input_error("cannot open for writing: " + path);
    detail::write_blob(os, h, f.values);
}

inline Field read_field_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw input_error("cannot open for reading: " + path);
    std::uint64_t hlen = 0;
    is.read(reinterpret_cast<char*>(&hlen), 8);
    if (!is || hlen > (1u << 20)) throw input_error("binary read: bad header length");
    std::string htext(hlen, '\0');
    is.read(htext.data(), static_cast<std::streamsize>(hlen));
    const nlohmann::json h = nlohmann::json::parse(htext);
    if (h.value("kind", "") != "field") throw input_error("not a field file: " + path);
    SpacetimeGrid g;
    g.d = h.at("d").get<int>();
    g.L = h.at("L").get<double>();
    g.N = h.at("N").get<int>();
    g.T = h.at("T").get<double>();
    g.Nt = h.at("Nt").get<int>();
    const FieldLayout lay =
        h.at("layout").get<std::string>() == "spacetime" ? FieldLayout::spacetime : FieldLayout::slice;
    Field f = Field::zeros(g, lay);
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(cplx)));
    if (!is) throw input_error("binary read: truncated payload");
    return f;
}

}  // namespace parapsi
