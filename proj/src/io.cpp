#include "wavelab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace wavelab {

void dump_field(const SpectralField& f, int J, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IOFailureError("cannot open " + path + " for writing");
    const KGrid& g = f.grid();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", g.dk);
    os << "# kgrid " << g.d << " " << g.M << " " << buf << " " << J << "\n";
    for (size_t a = 0; a < g.nodes(); ++a) {
        Kvec k = g.k_at(a);
        for (int ax = 0; ax < g.d; ++ax) {
            std::snprintf(buf, sizeof buf, "%.12e", k[ax]);
            os << (ax ? " " : "") << buf;
        }
        for (int c = 0; c < f.ncomp(); ++c) {
            std::snprintf(buf, sizeof buf, " %.12e %.12e", f.at(a, c).real(),
                          f.at(a, c).imag());
            os << buf;
        }
        os << "\n";
    }
    if (!os) throw IOFailureError("write failed: " + path);
}

std::pair<SpectralField, int> load_field(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IOFailureError("cannot open " + path);
    std::string hash, tag;
    int d, M, J;
    double dk;
    if (!(is >> hash >> tag >> d >> M >> dk >> J) || hash != "#" ||
        tag != "kgrid")
        throw IOFailureError("bad field dump header in " + path);
    KGrid g(d, M, dk);
    SpectralField f(g, 2 * J);
    for (size_t a = 0; a < g.nodes(); ++a) {
        double kv_in;
        for (int ax = 0; ax < d; ++ax)
            if (!(is >> kv_in)) throw IOFailureError("truncated dump " + path);
        for (int c = 0; c < 2 * J; ++c) {
            double re, im;
            if (!(is >> re >> im))
                throw IOFailureError("truncated dump " + path);
            f.at(a, c) = cplx(re, im);
        }
    }
    return {std::move(f), J};
}

std::pair<std::vector<double>, std::vector<double>> load_band_table(
    const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IOFailureError("cannot open band table " + path);
    std::vector<double> ks, ws;
    std::string line;
    while (std::getline(is, line)) {
        auto pos = line.find('#');
        if (pos != std::string::npos) line.erase(pos);
        std::istringstream ls(line);
        double k, w;
        if (ls >> k >> w) {
            if (!ks.empty() && k <= ks.back())
                throw IOFailureError("band table k not strictly increasing");
            ks.push_back(k);
            ws.push_back(w);
        }
    }
    if (ks.size() < 2) throw IOFailureError("band table too short");
    return {ks, ws};
}

}  // namespace wavelab
