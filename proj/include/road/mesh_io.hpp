#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "road/common.hpp"
#include "road/point_cloud.hpp"

namespace road {

/// Either a triangle mesh or an oriented point cloud, as found on disk.
struct LoadedShape {
    TriMesh mesh;
    OrientedPointCloud cloud;
    bool is_mesh = false;
};

namespace detail {

inline double parse_real(const std::string& tok, const std::string& ctx) {
    try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        require(used == tok.size(), ctx + ": bad number '" + tok + "'");
        return v;
    } catch (const Error&) {
        throw;
    } catch (...) {
        throw Error(Error::Kind::validation, ctx + ": bad number '" + tok + "'");
    }
}

// "i", "i/j", "i//k", "i/j/k" -> vertex index (1-based in the file)
inline std::uint32_t obj_vertex_ref(const std::string& tok, std::size_t vertex_count) {
    const std::size_t slash = tok.find('/');
    const std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
    long v = 0;
    try {
        v = std::stol(head);
    } catch (...) {
        throw Error(Error::Kind::validation, "OBJ: bad face index '" + tok + "'");
    }
    if (v < 0) v = long(vertex_count) + v + 1;
    require(v >= 1 && std::size_t(v) <= vertex_count, "OBJ: face index out of range");
    return std::uint32_t(v - 1);
}

} // namespace detail

inline TriMesh load_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open OBJ file: " + path.string());
    TriMesh mesh;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            std::string a, b, c;
            require(bool(ss >> a >> b >> c), "OBJ: short vertex at line " + std::to_string(line_no));
            mesh.vertices.push_back(to_f(Vec3{detail::parse_real(a, "OBJ"),
                                              detail::parse_real(b, "OBJ"),
                                              detail::parse_real(c, "OBJ")}));
        } else if (tag == "f") {
            std::vector<std::string> refs;
            std::string r;
            while (ss >> r) refs.push_back(r);
            require(refs.size() == 3,
                    "OBJ: only triangle faces are supported (line " + std::to_string(line_no) + ")");
            mesh.faces.push_back({detail::obj_vertex_ref(refs[0], mesh.vertices.size()),
                                  detail::obj_vertex_ref(refs[1], mesh.vertices.size()),
                                  detail::obj_vertex_ref(refs[2], mesh.vertices.size())});
        }
        // other tags (vn, vt, usemtl, ...) are ignored
    }
    require(!mesh.vertices.empty(), "OBJ: no vertices in " + path.string());
    return mesh;
}

namespace detail {

struct PlyProperty {
    std::string name;
    int byte_size = 4;   // scalar size
    bool is_float = true;
    bool is_list = false;
    int count_size = 1;  // list count scalar size
};

inline int ply_type_size(const std::string& t, bool& is_float) {
    is_float = (t == "float" || t == "float32" || t == "double" || t == "float64");
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
        t == "float32")
        return 4;
    if (t == "double" || t == "float64") return 8;
    throw Error(Error::Kind::validation, "PLY: unsupported property type '" + t + "'");
}

inline double read_scalar_le(const unsigned char* p, int size, bool is_float) {
    if (is_float && size == 4) {
        float f;
        std::memcpy(&f, p, 4);
        return double(f);
    }
    if (is_float && size == 8) {
        double d;
        std::memcpy(&d, p, 8);
        return d;
    }
    std::int64_t v = 0;
    std::memcpy(&v, p, std::size_t(size)); // little-endian host assumed
    // sign extension is irrelevant here: indices and counts are non-negative
    return double(v & ((size == 8) ? ~0ULL : ((1ULL << (8 * size)) - 1)));
}

} // namespace detail

/// ASCII and binary little-endian PLY. Vertices need x,y,z and may carry
/// nx,ny,nz; an optional face element turns the input into a mesh.
inline LoadedShape load_ply(const std::filesystem::path& path) {
    static_assert(std::endian::native == std::endian::little, "little-endian host required");
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open PLY file: " + path.string());

    std::string line;
    require(std::getline(in, line) && line.substr(0, 3) == "ply", "PLY: bad magic");
    bool binary = false;
    struct Element {
        std::string name;
        std::size_t count = 0;
        std::vector<detail::PlyProperty> props;
    };
    std::vector<Element> elements;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "comment" || tag == "obj_info") continue;
        if (tag == "format") {
            std::string fmt;
            ss >> fmt;
            require(fmt == "ascii" || fmt == "binary_little_endian",
                    "PLY: unsupported format '" + fmt + "'");
            binary = fmt == "binary_little_endian";
        } else if (tag == "element") {
            Element e;
            ss >> e.name >> e.count;
            elements.push_back(e);
        } else if (tag == "property") {
            require(!elements.empty(), "PLY: property before element");
            detail::PlyProperty p;
            std::string t;
            ss >> t;
            if (t == "list") {
                std::string ct, vt;
                ss >> ct >> vt >> p.name;
                bool dummy;
                p.count_size = detail::ply_type_size(ct, dummy);
                p.byte_size = detail::ply_type_size(vt, p.is_float);
                p.is_list = true;
            } else {
                ss >> p.name;
                p.byte_size = detail::ply_type_size(t, p.is_float);
            }
            elements.back().props.push_back(p);
        } else if (tag == "end_header") {
            break;
        }
    }

    LoadedShape out;
    std::vector<Vec3f> normals;
    bool has_normals = false;

    for (const auto& e : elements) {
        int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1;
        for (std::size_t p = 0; p < e.props.size(); ++p) {
            const auto& name = e.props[p].name;
            if (name == "x") ix = int(p);
            else if (name == "y") iy = int(p);
            else if (name == "z") iz = int(p);
            else if (name == "nx") inx = int(p);
            else if (name == "ny") iny = int(p);
            else if (name == "nz") inz = int(p);
        }
        const bool is_vertex = e.name == "vertex";
        const bool is_face = e.name == "face";
        if (is_vertex) {
            require(ix >= 0 && iy >= 0 && iz >= 0, "PLY: vertex element lacks x,y,z");
            has_normals = inx >= 0 && iny >= 0 && inz >= 0;
        }

        std::vector<double> scalars(e.props.size());
        std::vector<unsigned char> buf;
        for (std::size_t r = 0; r < e.count; ++r) {
            std::vector<std::uint32_t> list_values;
            if (binary) {
                for (std::size_t p = 0; p < e.props.size(); ++p) {
                    const auto& prop = e.props[p];
                    if (prop.is_list) {
                        buf.resize(std::size_t(prop.count_size));
                        in.read(reinterpret_cast<char*>(buf.data()), prop.count_size);
                        const std::size_t n =
                            std::size_t(detail::read_scalar_le(buf.data(), prop.count_size, false));
                        buf.resize(n * std::size_t(prop.byte_size));
                        in.read(reinterpret_cast<char*>(buf.data()),
                                std::streamsize(buf.size()));
                        for (std::size_t k = 0; k < n; ++k)
                            list_values.push_back(std::uint32_t(detail::read_scalar_le(
                                buf.data() + k * std::size_t(prop.byte_size), prop.byte_size,
                                prop.is_float)));
                    } else {
                        buf.resize(std::size_t(prop.byte_size));
                        in.read(reinterpret_cast<char*>(buf.data()), prop.byte_size);
                        scalars[p] =
                            detail::read_scalar_le(buf.data(), prop.byte_size, prop.is_float);
                    }
                }
                require(in.good(), "PLY: truncated binary payload");
            } else {
                for (std::size_t p = 0; p < e.props.size(); ++p) {
                    const auto& prop = e.props[p];
                    if (prop.is_list) {
                        std::size_t n = 0;
                        require(bool(in >> n), "PLY: truncated face row");
                        list_values.resize(n);
                        for (auto& v : list_values)
                            require(bool(in >> v), "PLY: truncated face row");
                    } else {
                        require(bool(in >> scalars[p]), "PLY: truncated vertex row");
                    }
                }
            }

            if (is_vertex) {
                out.cloud.points.push_back(
                    {float(scalars[std::size_t(ix)]), float(scalars[std::size_t(iy)]),
                     float(scalars[std::size_t(iz)])});
                if (has_normals)
                    normals.push_back(
                        {float(scalars[std::size_t(inx)]), float(scalars[std::size_t(iny)]),
                         float(scalars[std::size_t(inz)])});
            } else if (is_face && !list_values.empty()) {
                require(list_values.size() == 3, "PLY: only triangle faces are supported");
                out.mesh.faces.push_back({list_values[0], list_values[1], list_values[2]});
            }
        }
    }

    if (!out.mesh.faces.empty()) {
        out.is_mesh = true;
        out.mesh.vertices = out.cloud.points;
        out.cloud = {};
        return out;
    }
    require(has_normals,
            "PLY: normals required for point-cloud input without faces (" + path.string() + ")");
    out.cloud.normals = std::move(normals);
    return out;
}

/// Dispatch on extension; meshes come back as meshes, clouds as clouds.
inline LoadedShape load_shape(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".obj" || ext == ".OBJ") {
        LoadedShape s;
        s.mesh = load_obj(path);
        s.is_mesh = true;
        return s;
    }
    if (ext == ".ply" || ext == ".PLY") return load_ply(path);
    throw Error(Error::Kind::validation, "unsupported shape format: " + path.string());
}

/// Binary little-endian PLY with x,y,z,nx,ny,nz float32 properties.
inline void write_ply_cloud(const std::filesystem::path& path, const OrientedPointCloud& cloud) {
    static_assert(std::endian::native == std::endian::little, "little-endian host required");
    require(!cloud.empty(), "write_ply_cloud: refusing to write an empty cloud");
    require(cloud.points.size() == cloud.normals.size(), "write_ply_cloud: normals mismatch");
    std::ofstream out(path, std::ios::binary);
    require_runtime(out.good(), "cannot open for writing: " + path.string());
    out << "ply\nformat binary_little_endian 1.0\n"
        << "element vertex " << cloud.points.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "property float nx\nproperty float ny\nproperty float nz\n"
        << "end_header\n";
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        float row[6] = {cloud.points[i].x,  cloud.points[i].y,  cloud.points[i].z,
                        cloud.normals[i].x, cloud.normals[i].y, cloud.normals[i].z};
        out.write(reinterpret_cast<const char*>(row), sizeof(row));
    }
    require_runtime(out.good(), "write failed: " + path.string());
}

} // namespace road
