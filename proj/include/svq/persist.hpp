#ifndef SVQ_PERSIST_HPP
#define SVQ_PERSIST_HPP

#include <fstream>
#include <sstream>
#include <string>

#include "svq/io.hpp"
#include "svq/model.hpp"

namespace svq {

// Self-describing text format for a full encoder bundle. Values use the
// shortest decimal that round-trips, so load(save(m)) == m bit-exactly.
inline void save_model(const Svq& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "svq-model 1\n";
    out << "dim " << m.dim() << "\n";
    out << "codes " << m.num_codes() << "\n";
    out << "layout " << m.topology.layout_name() << "\n";
    out << "rows " << m.topology.rows() << "\n";
    out << "cols " << m.topology.cols() << "\n";
    out << "wrap " << (m.topology.wrap() ? 1 : 0) << "\n";
    out << "radius " << m.topology.radius() << "\n";
    out << "leak_radius " << m.leakage.radius() << "\n";
    out << "leak_sigma " << fmt(m.leakage.sigma()) << "\n";
    out << "recon\n";
    for (const auto& row : m.codebook.recon) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? " " : "") << fmt(row[i]);
        out << "\n";
    }
    out << "weights\n";
    for (const auto& row : m.response.weights) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? " " : "") << fmt(row[i]);
        out << "\n";
    }
    out << "biases\n";
    for (std::size_t i = 0; i < m.response.biases.size(); ++i)
        out << (i ? " " : "") << fmt(m.response.biases[i]);
    out << "\nend\n";
    if (!out) throw IoError("write failed: " + path);
}

inline Svq load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (tag != "svq-model" || version != 1)
        throw IoError("not an svq model file: " + path);

    auto expect = [&](const char* key) {
        std::string k;
        in >> k;
        if (k != key) throw IoError(std::string("model file: expected '") + key +
                                    "', got '" + k + "' in " + path);
    };

    int dim, codes, wrap, radius, leak_radius, rows, cols;
    std::string layout;
    double leak_sigma;
    expect("dim"); in >> dim;
    expect("codes"); in >> codes;
    expect("layout"); in >> layout;
    expect("rows"); in >> rows;
    expect("cols"); in >> cols;
    expect("wrap"); in >> wrap;
    expect("radius"); in >> radius;
    expect("leak_radius"); in >> leak_radius;
    expect("leak_sigma"); in >> leak_sigma;

    Topology topology = layout == "ring" ? Topology::ring(cols, radius)
                      : layout == "line" ? Topology::line(cols, radius)
                      : Topology::grid(rows, cols, wrap != 0, radius);
    if (topology.size() != codes)
        throw IoError("model file: layout size disagrees with code count in " + path);

    Svq m{Codebook{dim, {}}, ResponseModel{}, topology,
          leak_radius == 0 ? LeakageKernel::identity(codes)
                           : LeakageKernel::gaussian(topology, leak_radius, leak_sigma)};

    expect("recon");
    m.codebook.recon.assign(codes, Vec(dim));
    for (auto& row : m.codebook.recon)
        for (auto& v : row) in >> v;
    expect("weights");
    m.response.weights.assign(codes, Vec(dim));
    for (auto& row : m.response.weights)
        for (auto& v : row) in >> v;
    expect("biases");
    m.response.biases.assign(codes, 0.0);
    for (auto& v : m.response.biases) in >> v;
    expect("end");
    if (!in) throw IoError("truncated model file: " + path);
    return m;
}

} // namespace svq

#endif
