#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "nsbl/core/field.hpp"

namespace nsbl {

// ---------------------------------------------------------------------------
// Versioned binary snapshots. Layout: magic, grid header, then raw coefficient
// payloads (complex doubles, column-major) for each named field.
// ---------------------------------------------------------------------------

namespace io {

inline constexpr char kMagic[8] = {'N', 'S', 'B', 'L', 'F', '0', '0', '1'};

struct GridHeader {
    std::int32_t d, nx, ny, stretching;
    double box, Ly, beta;
};

inline GridHeader header_of(const Grid& g) {
    return GridHeader{g.d, g.nx, g.ny,
                      g.stretching.kind == Stretching::Kind::Tanh ? 1 : 0,
                      g.box, g.Ly, g.stretching.beta};
}

inline GridPtr grid_of(const GridHeader& h) {
    Stretching st = h.stretching == 1 ? Stretching::tanh_clustered(h.beta)
                                      : Stretching::uniform();
    return Grid::make(h.d, h.nx, h.box, h.ny, h.Ly, st);
}

inline bool header_matches(const GridHeader& h, const Grid& g) {
    GridHeader w = header_of(g);
    return std::memcmp(&h, &w, sizeof h) == 0;
}

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
void get(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof v);
}

inline void put_string(std::ostream& os, const std::string& s) {
    put(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& is) {
    std::uint32_t n = 0;
    get(is, n);
    std::string s(n, '\0');
    is.read(s.data(), n);
    return s;
}

}  // namespace io

/// A timestamped collection of named spectral fields on one grid.
struct Snapshot {
    GridPtr grid;
    double time = 0.0;
    std::map<std::string, SpectralField> fields;

    void add(const std::string& key, const SpectralField& f) { fields.emplace(key, f); }

    const SpectralField& at(const std::string& key) const {
        auto it = fields.find(key);
        if (it == fields.end()) throw Error("snapshot: no field named " + key);
        return it->second;
    }
    bool has(const std::string& key) const { return fields.count(key) > 0; }
};

inline void save_snapshot(const std::filesystem::path& path, const Snapshot& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open for writing: " + path.string());
    os.write(io::kMagic, sizeof io::kMagic);
    io::put(os, io::header_of(*s.grid));
    io::put(os, s.time);
    io::put(os, static_cast<std::uint32_t>(s.fields.size()));
    for (const auto& [key, f] : s.fields) {
        io::put_string(os, key);
        os.write(reinterpret_cast<const char*>(f.c.data()),
                 static_cast<std::streamsize>(sizeof(Complex) * f.c.size()));
    }
    if (!os) throw Error("short write: " + path.string());
}

inline Snapshot load_snapshot(const std::filesystem::path& path, GridPtr grid = nullptr) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open for reading: " + path.string());
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, io::kMagic, sizeof magic) != 0)
        throw Error("bad snapshot magic: " + path.string());
    io::GridHeader h{};
    io::get(is, h);
    if (grid) {
        if (!io::header_matches(h, *grid))
            throw Error("snapshot grid mismatch: " + path.string());
    } else {
        grid = io::grid_of(h);
    }
    Snapshot s;
    s.grid = grid;
    io::get(is, s.time);
    std::uint32_t nf = 0;
    io::get(is, nf);
    for (std::uint32_t i = 0; i < nf; ++i) {
        std::string key = io::get_string(is);
        SpectralField f(grid, key);
        is.read(reinterpret_cast<char*>(f.c.data()),
                static_cast<std::streamsize>(sizeof(Complex) * f.c.size()));
        s.fields.emplace(key, std::move(f));
    }
    if (!is) throw Error("truncated snapshot: " + path.string());
    return s;
}

/// Time series of snapshots in one directory, with an index file.
class TrajectoryStore {
public:
    TrajectoryStore(std::filesystem::path dir, GridPtr grid)
        : dir_(std::move(dir)), grid_(std::move(grid)) {
        std::filesystem::create_directories(dir_);
    }

    void append(const Snapshot& s) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "frame_%06zu.bin", times_.size());
        save_snapshot(dir_ / buf, s);
        times_.push_back(s.time);
        write_index();
    }

    /// Reopen an existing store; returns false when no index is present.
    bool reopen() {
        std::ifstream is(dir_ / "index.txt");
        if (!is) return false;
        times_.clear();
        double t;
        while (is >> t) times_.push_back(t);
        return true;
    }

    std::size_t size() const { return times_.size(); }
    double time(std::size_t i) const { return times_.at(i); }
    const std::vector<double>& times() const { return times_; }

    Snapshot load(std::size_t i) const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "frame_%06zu.bin", i);
        return load_snapshot(dir_ / buf, grid_);
    }

private:
    void write_index() const {
        std::ofstream os(dir_ / "index.txt");
        for (double t : times_) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g\n", t);
            os << buf;
        }
    }

    std::filesystem::path dir_;
    GridPtr grid_;
    std::vector<double> times_;
};

}  // namespace nsbl
