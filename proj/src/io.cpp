#include "revar/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

#include "revar/errors.hpp"

namespace revar {

namespace {

constexpr char kSeriesMagic[] = "REVARWFS";
constexpr char kModelMagic[] = "REVARMDL";
constexpr int kOffsetDigits = 20;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_offset(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%020llu", static_cast<unsigned long long>(v));
    return buf;
}

// Header values are single lines; percent-escape the three bytes that
// would break the line structure.
std::string escape_text(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '%': out += "%25"; break;
            case '\n': out += "%0A"; break;
            case '\r': out += "%0D"; break;
            default: out += c;
        }
    }
    return out;
}

std::string unescape_text(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            if (s.compare(i, 3, "%25") == 0) { out += '%'; i += 2; continue; }
            if (s.compare(i, 3, "%0A") == 0) { out += '\n'; i += 2; continue; }
            if (s.compare(i, 3, "%0D") == 0) { out += '\r'; i += 2; continue; }
        }
        out += s[i];
    }
    return out;
}

void append_f64_le(std::string& out, const double* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        out.append(reinterpret_cast<const char*>(data), n * sizeof(double));
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t u;
            std::memcpy(&u, &data[i], sizeof(u));
            for (int b = 0; b < 8; ++b) out += static_cast<char>((u >> (8 * b)) & 0xff);
        }
    }
}

void read_f64_le(std::ifstream& in, double* data, std::size_t n, const char* block,
                 const std::string& path) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
    } else {
        std::vector<char> raw(n * sizeof(double));
        in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t u = 0;
            for (int b = 0; b < 8; ++b)
                u |= static_cast<std::uint64_t>(static_cast<unsigned char>(raw[i * 8 + b]))
                     << (8 * b);
            std::memcpy(&data[i], &u, sizeof(u));
        }
    }
    if (!in) throw IoError(path + ": truncated read in block '" + block + "'");
}

struct Header {
    std::map<std::string, std::string> fields;
    std::uint64_t body_size = 0;  // bytes consumed by the text header

    const std::string& get(const std::string& key, const std::string& path) const {
        auto it = fields.find(key);
        if (it == fields.end())
            throw IoError(path + ": missing header field '" + key + "'");
        return it->second;
    }
    std::int64_t get_int(const std::string& key, const std::string& path) const {
        const std::string& v = get(key, path);
        char* end = nullptr;
        const long long x = std::strtoll(v.c_str(), &end, 10);
        if (end == v.c_str() || *end != '\0')
            throw IoError(path + ": invalid integer in header field '" + key + "'");
        return x;
    }
    std::uint64_t get_u64(const std::string& key, const std::string& path) const {
        const std::string& v = get(key, path);
        char* end = nullptr;
        const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
        if (end == v.c_str() || *end != '\0')
            throw IoError(path + ": invalid integer in header field '" + key + "'");
        return x;
    }
    double get_double(const std::string& key, const std::string& path) const {
        const std::string& v = get(key, path);
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0')
            throw IoError(path + ": invalid number in header field '" + key + "'");
        return x;
    }
};

// Reads "<magic>\n" then "key:value" lines up to a blank line.
Header read_header(std::ifstream& in, const char* magic, const std::string& path) {
    std::string magic_line;
    if (!std::getline(in, magic_line))
        throw IoError(path + ": cannot read magic line");
    if (magic_line != magic)
        throw IoError(path + ": bad magic '" + magic_line + "'");

    Header h;
    h.body_size = magic_line.size() + 1;
    std::string line;
    while (std::getline(in, line)) {
        h.body_size += line.size() + 1;
        if (line.empty()) return h;
        const auto colon = line.find(':');
        if (colon == std::string::npos)
            throw IoError(path + ": malformed header line at byte offset " +
                          std::to_string(h.body_size - line.size() - 1));
        h.fields.emplace(line.substr(0, colon), line.substr(colon + 1));
        if (h.fields.size() > 64)
            throw IoError(path + ": header has too many fields");
    }
    throw IoError(path + ": unterminated header");
}

std::uint64_t file_size_of(std::ifstream& in) {
    in.seekg(0, std::ios::end);
    const auto end = in.tellg();
    in.seekg(0, std::ios::beg);
    return static_cast<std::uint64_t>(end);
}

void check_version(const Header& h, const std::string& path) {
    const auto v = h.get_int("version", path);
    if (v != kFormatVersion)
        throw IoError(path + ": unknown format version " + std::to_string(v));
}

// Range-checked before any narrowing cast.
int get_dim(const Header& h, const std::string& key, const std::string& path) {
    const std::int64_t v = h.get_int(key, path);
    if (v < 1 || v > (1LL << 30))
        throw IoError(path + ": dimension '" + key + "' out of range (" + std::to_string(v) +
                      ")");
    return static_cast<int>(v);
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError(path + ": write failed");
}

void read_mask_block(std::ifstream& in, std::vector<std::uint8_t>& mask, std::size_t n_px,
                     const std::string& path) {
    mask.resize(n_px);
    in.read(reinterpret_cast<char*>(mask.data()), static_cast<std::streamsize>(n_px));
    if (!in) throw IoError(path + ": truncated read in block 'mask'");
    for (std::size_t i = 0; i < n_px; ++i) {
        if (mask[i] > 1)
            throw IoError(path + ": invalid mask byte at pixel " + std::to_string(i));
    }
}

}  // namespace

void save_series(const WavefrontSeries& series, const std::string& path) {
    validate_series(series);

    std::string head;
    head += kSeriesMagic;
    head += '\n';
    head += "version:" + std::to_string(kFormatVersion) + "\n";
    head += "T:" + std::to_string(series.frame_count) + "\n";
    head += "H:" + std::to_string(series.geom.height) + "\n";
    head += "W:" + std::to_string(series.geom.width) + "\n";
    head += "dt:" + fmt_double(series.geom.dt) + "\n";
    head += "dx:" + fmt_double(series.geom.dx) + "\n";
    head += "label:" + escape_text(series.label) + "\n";
    head += "meta:" + escape_text(series.meta) + "\n";

    const std::uint64_t n_values = series.values.size();
    const std::uint64_t n_px = series.geom.mask.size();
    // Offset lines have fixed width, so the header size is known up front.
    const std::uint64_t header_size = head.size() +
        (7 + kOffsetDigits + 1) + (5 + kOffsetDigits + 1) + (4 + kOffsetDigits + 1) + 1;
    const std::uint64_t frames_off = header_size;
    const std::uint64_t mask_off = frames_off + n_values * sizeof(double);
    const std::uint64_t end_off = mask_off + n_px;
    head += "frames:" + fmt_offset(frames_off) + "\n";
    head += "mask:" + fmt_offset(mask_off) + "\n";
    head += "end:" + fmt_offset(end_off) + "\n";
    head += "\n";

    std::string bytes;
    bytes.reserve(end_off);
    bytes += head;
    append_f64_le(bytes, series.values.data(), series.values.size());
    bytes.append(reinterpret_cast<const char*>(series.geom.mask.data()), n_px);
    write_file(path, bytes);
}

WavefrontSeries load_series(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open");
    const std::uint64_t fsize = file_size_of(in);

    const Header h = read_header(in, kSeriesMagic, path);
    check_version(h, path);

    WavefrontSeries s;
    s.frame_count = get_dim(h, "T", path);
    s.geom.height = get_dim(h, "H", path);
    s.geom.width = get_dim(h, "W", path);
    s.geom.dt = h.get_double("dt", path);
    s.geom.dx = h.get_double("dx", path);
    s.label = unescape_text(h.get("label", path));
    s.meta = unescape_text(h.get("meta", path));

    const std::uint64_t frames_off = h.get_u64("frames", path);
    const std::uint64_t mask_off = h.get_u64("mask", path);
    const std::uint64_t end_off = h.get_u64("end", path);
    const std::uint64_t n_values = static_cast<std::uint64_t>(s.frame_count) *
                                   s.geom.height * s.geom.width;
    const std::uint64_t n_px = static_cast<std::uint64_t>(s.geom.height) * s.geom.width;

    if (frames_off != h.body_size || mask_off != frames_off + n_values * sizeof(double) ||
        end_off != mask_off + n_px || end_off != fsize) {
        throw IoError(path + ": payload size mismatch (header declares " +
                      std::to_string(end_off) + " bytes, file has " + std::to_string(fsize) +
                      ", dims need " +
                      std::to_string(h.body_size + n_values * sizeof(double) + n_px) + ")");
    }

    s.values.resize(n_values);
    in.seekg(static_cast<std::streamoff>(frames_off));
    read_f64_le(in, s.values.data(), n_values, "frames", path);
    read_mask_block(in, s.geom.mask, n_px, path);

    validate_series(s);
    return s;
}

namespace {

void append_matrix(std::string& out, const Eigen::MatrixXd& m) {
    append_f64_le(out, m.data(), static_cast<std::size_t>(m.size()));
}

Eigen::MatrixXd read_matrix(std::ifstream& in, Eigen::Index rows, Eigen::Index cols,
                            const char* block, const std::string& path) {
    Eigen::MatrixXd m(rows, cols);
    read_f64_le(in, m.data(), static_cast<std::size_t>(m.size()), block, path);
    return m;
}

}  // namespace

void save_model(const ReVarModel& model, const std::string& path) {
    validate_model(model);

    const int P = model.whitening.pixel_dim();
    const int r = model.rank();
    const int p = model.var.order();
    const int k = model.longrange.k_modes();
    const Eigen::Index nspec = model.longrange.freqs.size();

    std::string head;
    head += kModelMagic;
    head += '\n';
    head += "version:" + std::to_string(kFormatVersion) + "\n";
    head += "P:" + std::to_string(P) + "\n";
    head += "r:" + std::to_string(r) + "\n";
    head += "p:" + std::to_string(p) + "\n";
    head += "k:" + std::to_string(k) + "\n";
    head += "nspec:" + std::to_string(nspec) + "\n";
    head += "H:" + std::to_string(model.geom.height) + "\n";
    head += "W:" + std::to_string(model.geom.width) + "\n";
    head += "dt:" + fmt_double(model.geom.dt) + "\n";
    head += "dx:" + fmt_double(model.geom.dx) + "\n";
    head += "T:" + std::to_string(model.meta.train_frames) + "\n";
    head += "seed:" + std::to_string(model.meta.seed) + "\n";
    head += "energy:" + fmt_double(model.meta.energy_threshold) + "\n";
    head += "shrink:" + fmt_double(model.meta.shrink_rho) + "\n";
    head += "radius:" + fmt_double(model.meta.spectral_radius) + "\n";
    head += "label:" + escape_text(model.label) + "\n";
    head += "meta:" + escape_text(model.meta.config) + "\n";

    const std::uint64_t n_px = model.geom.mask.size();
    struct Block { const char* key; std::uint64_t bytes; };
    const Block blocks[] = {
        {"mu", static_cast<std::uint64_t>(P) * 8},
        {"basis", static_cast<std::uint64_t>(P) * r * 8},
        {"eigvals", static_cast<std::uint64_t>(r) * 8},
        {"var", static_cast<std::uint64_t>(p) * r * r * 8},
        {"rwbasis", static_cast<std::uint64_t>(r) * r * 8},
        {"rweigvals", static_cast<std::uint64_t>(r) * 8},
        {"lrfreqs", static_cast<std::uint64_t>(nspec) * 8},
        {"lramps", static_cast<std::uint64_t>(nspec) * k * 8},
        {"mask", n_px},
    };

    std::uint64_t header_size = head.size() + 1;  // trailing blank line
    for (const Block& b : blocks) header_size += std::strlen(b.key) + 1 + kOffsetDigits + 1;
    header_size += std::strlen("end") + 1 + kOffsetDigits + 1;

    std::uint64_t off = header_size;
    for (const Block& b : blocks) {
        head += std::string(b.key) + ":" + fmt_offset(off) + "\n";
        off += b.bytes;
    }
    head += "end:" + fmt_offset(off) + "\n";
    head += "\n";

    std::string bytes;
    bytes.reserve(off);
    bytes += head;
    append_matrix(bytes, model.whitening.mu);
    append_matrix(bytes, model.whitening.basis);
    append_matrix(bytes, model.whitening.eigvals);
    for (const auto& a : model.var.coeffs) append_matrix(bytes, a);
    append_matrix(bytes, model.rewhiten.basis);
    append_matrix(bytes, model.rewhiten.eigvals);
    append_matrix(bytes, model.longrange.freqs);
    append_matrix(bytes, model.longrange.amps);
    bytes.append(reinterpret_cast<const char*>(model.geom.mask.data()), n_px);
    write_file(path, bytes);
}

ReVarModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open");
    const std::uint64_t fsize = file_size_of(in);

    const Header h = read_header(in, kModelMagic, path);
    check_version(h, path);

    const std::int64_t P = get_dim(h, "P", path);
    const std::int64_t r = get_dim(h, "r", path);
    const std::int64_t p = get_dim(h, "p", path);
    const std::int64_t k = h.get_int("k", path);
    const std::int64_t nspec = h.get_int("nspec", path);
    if (k < 0 || nspec < 0 || k > (1LL << 30) || nspec > (1LL << 30))
        throw IoError(path + ": dimension 'k' or 'nspec' out of range");

    ReVarModel m;
    m.geom.height = get_dim(h, "H", path);
    m.geom.width = get_dim(h, "W", path);
    m.geom.dt = h.get_double("dt", path);
    m.geom.dx = h.get_double("dx", path);
    m.meta.train_frames = h.get_int("T", path);
    m.meta.seed = h.get_u64("seed", path);
    m.meta.energy_threshold = h.get_double("energy", path);
    m.meta.shrink_rho = h.get_double("shrink", path);
    m.meta.spectral_radius = h.get_double("radius", path);
    m.label = unescape_text(h.get("label", path));
    m.meta.config = unescape_text(h.get("meta", path));
    m.meta.var_order = static_cast<int>(p);
    m.meta.k_modes = static_cast<int>(k);

    const std::uint64_t n_px =
        static_cast<std::uint64_t>(m.geom.height) * m.geom.width;
    struct Block { const char* key; std::uint64_t bytes; };
    const Block blocks[] = {
        {"mu", static_cast<std::uint64_t>(P) * 8},
        {"basis", static_cast<std::uint64_t>(P) * r * 8},
        {"eigvals", static_cast<std::uint64_t>(r) * 8},
        {"var", static_cast<std::uint64_t>(p) * r * r * 8},
        {"rwbasis", static_cast<std::uint64_t>(r) * r * 8},
        {"rweigvals", static_cast<std::uint64_t>(r) * 8},
        {"lrfreqs", static_cast<std::uint64_t>(nspec) * 8},
        {"lramps", static_cast<std::uint64_t>(nspec) * k * 8},
        {"mask", n_px},
    };

    // Declared offsets must reproduce the layout implied by the declared
    // dimensions; any disagreement means the blocks and the header dims
    // were written for different ranks.
    std::uint64_t off = h.body_size;
    for (const Block& b : blocks) {
        if (h.get_u64(b.key, path) != off)
            throw IoError(path + ": inconsistent rank (block '" + std::string(b.key) +
                          "' offset does not match declared dimensions)");
        off += b.bytes;
    }
    if (h.get_u64("end", path) != off || off != fsize)
        throw IoError(path + ": payload size mismatch (expected " + std::to_string(off) +
                      " bytes, file has " + std::to_string(fsize) + ")");

    in.seekg(static_cast<std::streamoff>(h.body_size));
    m.whitening.mu = read_matrix(in, P, 1, "mu", path);
    m.whitening.basis = read_matrix(in, P, r, "basis", path);
    m.whitening.eigvals = read_matrix(in, r, 1, "eigvals", path);
    m.var.coeffs.resize(static_cast<std::size_t>(p));
    for (auto& a : m.var.coeffs) a = read_matrix(in, r, r, "var", path);
    m.rewhiten.basis = read_matrix(in, r, r, "rwbasis", path);
    m.rewhiten.eigvals = read_matrix(in, r, 1, "rweigvals", path);
    m.longrange.freqs = read_matrix(in, nspec, 1, "lrfreqs", path);
    m.longrange.amps = read_matrix(in, nspec, k, "lramps", path);
    read_mask_block(in, m.geom.mask, n_px, path);

    validate_model(m);
    return m;
}

// Header-only summary, so multi-gigabyte series stay cheap to inspect.
std::string describe_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open");
    std::string magic_line;
    if (!std::getline(in, magic_line)) throw IoError(path + ": cannot read magic line");
    in.seekg(0);

    char buf[512];
    if (magic_line == kSeriesMagic) {
        const Header h = read_header(in, kSeriesMagic, path);
        check_version(h, path);
        const std::int64_t height = h.get_int("H", path);
        const std::int64_t width = h.get_int("W", path);
        std::vector<std::uint8_t> mask;
        in.seekg(static_cast<std::streamoff>(h.get_u64("mask", path)));
        read_mask_block(in, mask, static_cast<std::size_t>(height * width), path);
        const auto n_mask = std::count(mask.begin(), mask.end(), std::uint8_t{1});
        std::snprintf(buf, sizeof(buf),
                      "wavefront series: T=%lld H=%lld W=%lld mask=%lld px dt=%g s dx=%g m "
                      "label=\"%s\"",
                      static_cast<long long>(h.get_int("T", path)),
                      static_cast<long long>(height), static_cast<long long>(width),
                      static_cast<long long>(n_mask), h.get_double("dt", path),
                      h.get_double("dx", path), unescape_text(h.get("label", path)).c_str());
        return buf;
    }
    if (magic_line == kModelMagic) {
        const Header h = read_header(in, kModelMagic, path);
        check_version(h, path);
        std::snprintf(buf, sizeof(buf),
                      "model: r=%lld p=%lld radius=%.6f grid=%lldx%lld train_T=%lld "
                      "k_modes=%lld label=\"%s\"",
                      static_cast<long long>(h.get_int("r", path)),
                      static_cast<long long>(h.get_int("p", path)),
                      h.get_double("radius", path),
                      static_cast<long long>(h.get_int("H", path)),
                      static_cast<long long>(h.get_int("W", path)),
                      static_cast<long long>(h.get_int("T", path)),
                      static_cast<long long>(h.get_int("k", path)),
                      unescape_text(h.get("label", path)).c_str());
        return buf;
    }
    throw IoError(path + ": bad magic '" + magic_line + "'");
}

}  // namespace revar
