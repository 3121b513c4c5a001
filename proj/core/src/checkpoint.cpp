#include <istream>
#include <ostream>
#include <sstream>

#include "survkit/error.hpp"
#include "survkit/format.hpp"
#include "survkit/survnet.hpp"

namespace survkit {

namespace {

constexpr const char* kMagic = "survkit-checkpoint";
constexpr int kVersion = 1;

void write_block(std::ostream& out, const std::string& name, const Matrix& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << format_double(m(r, c));
        out << '\n';
    }
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::string word() {
        std::string w;
        if (!(in_ >> w)) throw Error("checkpoint: unexpected end of file");
        return w;
    }

    void expect(const std::string& key) {
        const auto w = word();
        if (w != key) throw Error("checkpoint: expected '" + key + "', found '" + w + "'");
    }

    double number() {
        const auto w = word();
        double v = 0.0;
        if (!parse_double(w, v)) throw Error("checkpoint: bad number '" + w + "'");
        return v;
    }

    long long integer() {
        const auto w = word();
        long long v = 0;
        if (!parse_int(w, v)) throw Error("checkpoint: bad integer '" + w + "'");
        return v;
    }

    Matrix block(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
        expect(name);
        if (integer() != rows || integer() != cols) throw Error("checkpoint: shape mismatch for " + name);
        Matrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number();
        }
        return m;
    }

private:
    std::istream& in_;
};

}  // namespace

void write_checkpoint(std::ostream& out, const SurvivalNetwork& net, std::uint64_t preprocess_hash,
                      double max_time) {
    const auto& s = net.shape;
    out << kMagic << " v" << kVersion << '\n';
    out << "input_dim " << s.input_dim << '\n';
    out << "hidden1 " << s.hidden1 << '\n';
    out << "hidden2 " << s.hidden2 << '\n';
    out << "n_intervals " << s.n_intervals << '\n';
    out << "dropout " << format_double(s.dropout) << '\n';
    out << "batch_norm " << (s.batch_norm ? 1 : 0) << '\n';
    out << "max_time " << format_double(max_time) << '\n';
    std::ostringstream hash;
    hash << std::hex << preprocess_hash;
    out << "preprocess_hash " << hash.str() << '\n';
    for (std::size_t k = 0; k < kParamCount; ++k) write_block(out, param_name(k), net.params[k]);
    for (std::size_t l = 0; l < 2; ++l) {
        write_block(out, "running_mean" + std::to_string(l + 1), net.running[l].mean);
        write_block(out, "running_var" + std::to_string(l + 1), net.running[l].var);
    }
}

Checkpoint read_checkpoint(std::istream& in) {
    Reader reader(in);
    reader.expect(kMagic);
    if (reader.word() != "v" + std::to_string(kVersion)) throw Error("checkpoint: unsupported version");

    NetworkShape shape;
    reader.expect("input_dim");
    shape.input_dim = static_cast<std::size_t>(reader.integer());
    reader.expect("hidden1");
    shape.hidden1 = static_cast<std::size_t>(reader.integer());
    reader.expect("hidden2");
    shape.hidden2 = static_cast<std::size_t>(reader.integer());
    reader.expect("n_intervals");
    shape.n_intervals = static_cast<std::size_t>(reader.integer());
    reader.expect("dropout");
    shape.dropout = reader.number();
    reader.expect("batch_norm");
    shape.batch_norm = reader.integer() != 0;

    Checkpoint ckpt;
    reader.expect("max_time");
    ckpt.max_time = reader.number();
    reader.expect("preprocess_hash");
    ckpt.preprocess_hash = std::stoull(reader.word(), nullptr, 16);

    // Shapes come from a freshly initialized network of the same layout.
    ckpt.network = init_network(shape, 0);
    for (std::size_t k = 0; k < kParamCount; ++k) {
        const auto& ref = ckpt.network.params[k];
        ckpt.network.params[k] = reader.block(param_name(k), ref.rows(), ref.cols());
    }
    for (std::size_t l = 0; l < 2; ++l) {
        auto& stats = ckpt.network.running[l];
        const auto width = stats.mean.size();
        stats.mean = reader.block("running_mean" + std::to_string(l + 1), 1, width).row(0);
        stats.var = reader.block("running_var" + std::to_string(l + 1), 1, width).row(0);
    }
    return ckpt;
}

}  // namespace survkit
