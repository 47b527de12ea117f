#include "oscar/field_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace oscar {

std::string format_full(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

void write_field_csv(const std::string& path, const Grid& grid, const ComplexField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path);
    os << "y,re,im\n";
    for (int m = 0; m < grid.size(); ++m)
        os << format_full(grid.nodes()[m]) << ',' << format_full(f[m].real()) << ','
           << format_full(f[m].imag()) << '\n';
}

ComplexField read_field_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path);
    std::string line;
    std::getline(is, line);  // header
    std::vector<Complex> vals;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double y, re, im;
        char c;
        if (!(ss >> y >> c >> re >> c >> im)) throw ConfigInvalid("bad CSV row: " + line);
        vals.emplace_back(re, im);
    }
    ComplexField f(vals.size());
    for (size_t m = 0; m < vals.size(); ++m) f[m] = vals[m];
    return f;
}

namespace {
void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xff;
    os.write(reinterpret_cast<char*>(b), 8);
}
std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= (std::uint64_t)b[i] << (8 * i);
    return v;
}
void put_doubles(std::ostream& os, const double* d, size_t n) {
    // assumes little-endian host, as everywhere this runs
    os.write(reinterpret_cast<const char*>(d), n * sizeof(double));
}
}  // namespace

void write_field_block(std::ostream& os, const ComplexField& f) {
    put_u64(os, (std::uint64_t)(2 * f.size()));
    put_doubles(os, reinterpret_cast<const double*>(f.data()), 2 * f.size());
}

ComplexField read_field_block(std::istream& is) {
    std::uint64_t n = get_u64(is);
    ComplexField f(n / 2);
    is.read(reinterpret_cast<char*>(f.data()), n * sizeof(double));
    if (!is) throw Error("truncated field block");
    return f;
}

void write_matrix_block(std::ostream& os, const Eigen::MatrixXcd& m) {
    put_u64(os, (std::uint64_t)m.rows());
    put_u64(os, (std::uint64_t)m.cols());
    put_doubles(os, reinterpret_cast<const double*>(m.data()), 2 * m.size());
}

Eigen::MatrixXcd read_matrix_block(std::istream& is) {
    std::uint64_t r = get_u64(is), c = get_u64(is);
    Eigen::MatrixXcd m(r, c);
    is.read(reinterpret_cast<char*>(m.data()), 2 * r * c * sizeof(double));
    if (!is) throw Error("truncated matrix block");
    return m;
}

void write_matrix_block_file(const std::string& path, const Eigen::MatrixXcd& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path);
    write_matrix_block(os, m);
}

std::uint64_t file_checksum(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path);
    std::uint64_t h = 1469598103934665603ull;
    char buf[65536];
    while (is.read(buf, sizeof buf) || is.gcount() > 0) {
        for (std::streamsize i = 0; i < is.gcount(); ++i) {
            h ^= (unsigned char)buf[i];
            h *= 1099511628211ull;
        }
        if (!is) break;
    }
    return h;
}

}  // namespace oscar
