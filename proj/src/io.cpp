#include "conelab/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace conelab {

static_assert(std::endian::native == std::endian::little,
              "the field container is written natively and assumes little-endian");

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_f64(std::ostream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
double get_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

}  // namespace

void write_field(const ScalarField& u, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_field: cannot open " + path);
    os.write("CLAB", 4);
    put_u32(os, 1u);
    put_u32(os, static_cast<std::uint32_t>(u.dom.dim));
    for (int a = 0; a < u.dom.dim; ++a)
        put_u32(os, static_cast<std::uint32_t>(u.dom.n[static_cast<std::size_t>(a)]));
    for (int a = 0; a < u.dom.dim; ++a) put_f64(os, u.dom.lo[static_cast<std::size_t>(a)]);
    for (int a = 0; a < u.dom.dim; ++a) put_f64(os, u.dom.hi[static_cast<std::size_t>(a)]);
    for (double v : u.v) put_f64(os, v);
    if (!os) throw std::runtime_error("write_field: write failed for " + path);
}

ScalarField read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_field: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "CLAB", 4) != 0)
        throw std::runtime_error("read_field: bad magic in " + path);
    const std::uint32_t version = get_u32(is);
    if (version != 1u) throw std::runtime_error("read_field: unsupported container version");
    const std::uint32_t dim = get_u32(is);
    if (dim < 1 || dim > 2) throw std::runtime_error("read_field: unsupported dim");
    std::array<int, 2> n{1, 1};
    for (std::uint32_t a = 0; a < dim; ++a) n[a] = static_cast<int>(get_u32(is));
    std::array<double, 2> lo{}, hi{};
    for (std::uint32_t a = 0; a < dim; ++a) lo[a] = get_f64(is);
    for (std::uint32_t a = 0; a < dim; ++a) hi[a] = get_f64(is);
    GridDomain d(static_cast<int>(dim), lo, hi, n);
    ScalarField u(d);
    for (double& v : u.v) v = get_f64(is);
    if (!is) throw std::runtime_error("read_field: truncated file " + path);
    return u;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_field_csv(const ScalarField& u, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_field_csv: cannot open " + path);
    os << (u.dom.dim == 1 ? "x1,value\n" : "x1,x2,value\n");
    for (std::size_t i = 0; i < u.v.size(); ++i) {
        const Vec x = u.dom.point(i);
        os << format_double(x[0]);
        if (u.dom.dim == 2) os << ',' << format_double(x[1]);
        os << ',' << format_double(u.v[i]) << '\n';
    }
}

void write_opening_csv(const OpeningField& of, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_opening_csv: cannot open " + path);
    os << (of.dom.dim == 1 ? "x,K_star,g,censored\n" : "x,y,K_star,g,censored\n");
    for (std::size_t i = 0; i < of.k_star.size(); ++i) {
        if (!of.evaluated[i]) continue;
        const Vec x = of.dom.point(i);
        os << format_double(x[0]);
        if (of.dom.dim == 2) os << ',' << format_double(x[1]);
        if (of.censored[i])
            os << ",," << ",1\n";
        else
            os << ',' << format_double(of.k_star[i]) << ',' << format_double(of.g[i]) << ",0\n";
    }
}

void write_decay_csv(const DecayCurve& dc, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_decay_csv: cannot open " + path);
    os << "k,t_k,measure,in_fit_window\n";
    for (std::size_t k = 0; k < dc.m.size(); ++k) {
        os << k << ',' << format_double(dc.t[k]) << ',' << format_double(dc.m[k]) << ','
           << (dc.in_fit_window[k] ? 1 : 0) << '\n';
    }
}

}  // namespace conelab
