#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fsgu/point_cloud.hpp"

namespace fsgu {

class PlyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PlyFormat { Ascii, BinaryLittleEndian };
enum class PlyPrecision { Float32, Float64 };

namespace detail {

struct PlyProperty {
    std::string type;
    std::string name;
    bool is_list = false;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

inline std::size_t ply_type_size(const std::string& t) {
    if (t == "char" || t == "int8" || t == "uchar" || t == "uint8") return 1;
    if (t == "short" || t == "int16" || t == "ushort" || t == "uint16") return 2;
    if (t == "int" || t == "int32" || t == "uint" || t == "uint32" || t == "float" || t == "float32") return 4;
    if (t == "double" || t == "float64") return 8;
    throw PlyError("ply: unknown property type '" + t + "'");
}

inline bool ply_type_is_real(const std::string& t) {
    return t == "float" || t == "float32" || t == "double" || t == "float64";
}

inline double decode_scalar(const unsigned char* p, const std::string& t) {
    if (t == "float" || t == "float32") {
        float v;
        std::memcpy(&v, p, 4);
        return static_cast<double>(v);
    }
    if (t == "double" || t == "float64") {
        double v;
        std::memcpy(&v, p, 8);
        return v;
    }
    if (t == "char" || t == "int8") return static_cast<double>(*reinterpret_cast<const std::int8_t*>(p));
    if (t == "uchar" || t == "uint8") return static_cast<double>(*p);
    if (t == "short" || t == "int16") {
        std::int16_t v;
        std::memcpy(&v, p, 2);
        return v;
    }
    if (t == "ushort" || t == "uint16") {
        std::uint16_t v;
        std::memcpy(&v, p, 2);
        return v;
    }
    if (t == "int" || t == "int32") {
        std::int32_t v;
        std::memcpy(&v, p, 4);
        return v;
    }
    if (t == "uint" || t == "uint32") {
        std::uint32_t v;
        std::memcpy(&v, p, 4);
        return v;
    }
    throw PlyError("ply: unknown property type '" + t + "'");
}

inline double parse_ascii_double(const char*& p, const char* end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    double v = 0.0;
    auto res = std::from_chars(p, end, v);
    if (res.ec != std::errc{}) throw PlyError("ply: malformed ascii number");
    p = res.ptr;
    return v;
}

// Renormalizes loaded normals in place. Zero-length ones are replaced by
// (0,0,1); the file still loads.
inline void renormalize_normals(PointCloud& cloud, const std::string& path) {
    std::size_t replaced = 0;
    for (Vec3& n : cloud.normals) {
        const double len = n.norm();
        if (len > 0.0) {
            n = n / len;
        } else {
            n = {0.0, 0.0, 1.0};
            ++replaced;
        }
    }
    if (replaced > 0) {
        std::cerr << "fsgu: warning: " << path << ": " << replaced
                  << " zero-length normal(s) replaced by (0,0,1)\n";
    }
}

}  // namespace detail

/// Reads a PLY point cloud (ASCII or binary little-endian). The vertex
/// element must carry x, y, z as float or double; nx, ny, nz become normals
/// when all three are present. Other scalar vertex properties and trailing
/// elements (faces etc.) are ignored.
inline PointCloud read_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PlyError("ply: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw PlyError("ply: empty file '" + path + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "ply") throw PlyError("ply: missing 'ply' magic in '" + path + "'");

    PlyFormat format{};
    bool have_format = false;
    std::vector<detail::PlyElement> elements;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "comment" || tok == "obj_info" || tok.empty()) continue;
        if (tok == "format") {
            std::string fmt, version;
            ls >> fmt >> version;
            if (fmt == "ascii") {
                format = PlyFormat::Ascii;
            } else if (fmt == "binary_little_endian") {
                format = PlyFormat::BinaryLittleEndian;
            } else if (fmt == "binary_big_endian") {
                throw PlyError("ply: big-endian binary is not supported: '" + path + "'");
            } else {
                throw PlyError("ply: unknown format '" + fmt + "'");
            }
            have_format = true;
        } else if (tok == "element") {
            detail::PlyElement el;
            if (!(ls >> el.name >> el.count)) throw PlyError("ply: malformed element line");
            elements.push_back(std::move(el));
        } else if (tok == "property") {
            if (elements.empty()) throw PlyError("ply: property before any element");
            detail::PlyProperty prop;
            std::string t;
            ls >> t;
            if (t == "list") {
                prop.is_list = true;
                std::string count_t, value_t;
                ls >> count_t >> value_t >> prop.name;
            } else {
                prop.type = t;
                ls >> prop.name;
            }
            if (prop.name.empty()) throw PlyError("ply: malformed property line");
            elements.back().properties.push_back(std::move(prop));
        } else if (tok == "end_header") {
            header_done = true;
            break;
        } else {
            throw PlyError("ply: unexpected header token '" + tok + "'");
        }
    }
    if (!header_done) throw PlyError("ply: header not terminated by end_header");
    if (!have_format) throw PlyError("ply: header lacks a format line");

    auto vertex_it = std::find_if(elements.begin(), elements.end(),
                                  [](const detail::PlyElement& e) { return e.name == "vertex"; });
    if (vertex_it == elements.end()) throw PlyError("ply: no vertex element in '" + path + "'");
    const detail::PlyElement& vertex = *vertex_it;
    if (vertex.count == 0) throw PlyError("ply: empty vertex element in '" + path + "'");

    int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1;
    for (std::size_t i = 0; i < vertex.properties.size(); ++i) {
        const auto& p = vertex.properties[i];
        if (p.is_list) throw PlyError("ply: list property inside vertex element is not supported");
        if (p.name == "x") ix = static_cast<int>(i);
        if (p.name == "y") iy = static_cast<int>(i);
        if (p.name == "z") iz = static_cast<int>(i);
        if (p.name == "nx") inx = static_cast<int>(i);
        if (p.name == "ny") iny = static_cast<int>(i);
        if (p.name == "nz") inz = static_cast<int>(i);
    }
    if (ix < 0 || iy < 0 || iz < 0) {
        throw PlyError("ply: vertex element must carry x, y and z properties");
    }
    for (int idx : {ix, iy, iz}) {
        if (!detail::ply_type_is_real(vertex.properties[static_cast<std::size_t>(idx)].type)) {
            throw PlyError("ply: x/y/z must be float or double");
        }
    }
    const bool has_normals = inx >= 0 && iny >= 0 && inz >= 0;

    // Skip any elements declared ahead of the vertex element.
    for (auto it = elements.begin(); it != vertex_it; ++it) {
        if (format == PlyFormat::Ascii) {
            for (std::size_t r = 0; r < it->count; ++r) {
                if (!std::getline(in, line)) throw PlyError("ply: truncated element '" + it->name + "'");
            }
        } else {
            std::size_t stride = 0;
            for (const auto& p : it->properties) {
                if (p.is_list) {
                    throw PlyError("ply: binary list element '" + it->name + "' ahead of vertex data is not supported");
                }
                stride += detail::ply_type_size(p.type);
            }
            in.seekg(static_cast<std::streamoff>(stride * it->count), std::ios::cur);
        }
    }

    PointCloud cloud;
    cloud.points.resize(vertex.count);
    if (has_normals) cloud.normals.resize(vertex.count);

    if (format == PlyFormat::Ascii) {
        for (std::size_t r = 0; r < vertex.count; ++r) {
            if (!std::getline(in, line)) {
                throw PlyError("ply: vertex count mismatch (file ends early) in '" + path + "'");
            }
            const char* p = line.data();
            const char* end = line.data() + line.size();
            std::vector<double> row(vertex.properties.size());
            for (std::size_t c = 0; c < vertex.properties.size(); ++c) {
                row[c] = detail::parse_ascii_double(p, end);
            }
            cloud.points[r] = {row[static_cast<std::size_t>(ix)], row[static_cast<std::size_t>(iy)],
                               row[static_cast<std::size_t>(iz)]};
            if (has_normals) {
                cloud.normals[r] = {row[static_cast<std::size_t>(inx)], row[static_cast<std::size_t>(iny)],
                                    row[static_cast<std::size_t>(inz)]};
            }
        }
    } else {
        std::size_t stride = 0;
        std::vector<std::size_t> offsets(vertex.properties.size());
        for (std::size_t c = 0; c < vertex.properties.size(); ++c) {
            offsets[c] = stride;
            stride += detail::ply_type_size(vertex.properties[c].type);
        }
        std::vector<unsigned char> buf(stride * vertex.count);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
            throw PlyError("ply: vertex count mismatch (file ends early) in '" + path + "'");
        }
        auto decode = [&](std::size_t row, int col) {
            const auto& prop = vertex.properties[static_cast<std::size_t>(col)];
            return detail::decode_scalar(buf.data() + row * stride + offsets[static_cast<std::size_t>(col)], prop.type);
        };
        for (std::size_t r = 0; r < vertex.count; ++r) {
            cloud.points[r] = {decode(r, ix), decode(r, iy), decode(r, iz)};
            if (has_normals) cloud.normals[r] = {decode(r, inx), decode(r, iny), decode(r, inz)};
        }
    }

    if (has_normals) detail::renormalize_normals(cloud, path);
    return cloud;
}

namespace detail {

inline void append_ascii(std::string& out, double v, PlyPrecision precision) {
    char buf[32];
    std::to_chars_result res{};
    if (precision == PlyPrecision::Float32) {
        res = std::to_chars(buf, buf + sizeof(buf), static_cast<float>(v));
    } else {
        res = std::to_chars(buf, buf + sizeof(buf), v);
    }
    out.append(buf, res.ptr);
}

inline void append_binary(std::string& out, double v, PlyPrecision precision) {
    if (precision == PlyPrecision::Float32) {
        const float f = static_cast<float>(v);
        char raw[4];
        std::memcpy(raw, &f, 4);
        out.append(raw, 4);
    } else {
        char raw[8];
        std::memcpy(raw, &v, 8);
        out.append(raw, 8);
    }
}

}  // namespace detail

/// Writes a PLY file readable by read_ply. Point order is preserved and
/// 64-bit output round-trips coordinates exactly.
inline void write_ply(const PointCloud& cloud, const std::string& path,
                      PlyFormat format = PlyFormat::BinaryLittleEndian,
                      PlyPrecision precision = PlyPrecision::Float64) {
    if (cloud.empty()) throw std::invalid_argument("write_ply: empty cloud");
    if (cloud.has_normals() && cloud.normals.size() != cloud.points.size()) {
        throw std::invalid_argument("write_ply: normal count mismatch");
    }
    if (format == PlyFormat::BinaryLittleEndian && std::endian::native != std::endian::little) {
        throw PlyError("ply: binary output requires a little-endian host");
    }

    const char* scalar = precision == PlyPrecision::Float32 ? "float" : "double";
    std::string out;
    out += "ply\n";
    out += format == PlyFormat::Ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
    out += "element vertex " + std::to_string(cloud.size()) + "\n";
    for (const char* name : {"x", "y", "z"}) {
        out += std::string("property ") + scalar + " " + name + "\n";
    }
    if (cloud.has_normals()) {
        for (const char* name : {"nx", "ny", "nz"}) {
            out += std::string("property ") + scalar + " " + name + "\n";
        }
    }
    out += "end_header\n";

    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        if (format == PlyFormat::Ascii) {
            detail::append_ascii(out, p.x, precision);
            out += ' ';
            detail::append_ascii(out, p.y, precision);
            out += ' ';
            detail::append_ascii(out, p.z, precision);
            if (cloud.has_normals()) {
                const Vec3& n = cloud.normals[i];
                for (double v : {n.x, n.y, n.z}) {
                    out += ' ';
                    detail::append_ascii(out, v, precision);
                }
            }
            out += '\n';
        } else {
            detail::append_binary(out, p.x, precision);
            detail::append_binary(out, p.y, precision);
            detail::append_binary(out, p.z, precision);
            if (cloud.has_normals()) {
                const Vec3& n = cloud.normals[i];
                detail::append_binary(out, n.x, precision);
                detail::append_binary(out, n.y, precision);
                detail::append_binary(out, n.z, precision);
            }
        }
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw PlyError("ply: cannot write '" + path + "'");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw PlyError("ply: write failed for '" + path + "'");
}

}  // namespace fsgu
