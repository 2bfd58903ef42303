#include "trigcm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "trigcm/error.hpp"

namespace trigcm {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
   public:
    template <typename T>
    void put(T v) {
        char buf[sizeof(T)];
        std::memcpy(buf, &v, sizeof(T));
        out_.append(buf, sizeof(T));
    }
    void bytes(const char* p, std::size_t n) { out_.append(p, n); }
    void string(const std::string& s) {
        put(static_cast<std::uint32_t>(s.size()));
        out_ += s;
    }
    std::string take() { return std::move(out_); }

   private:
    std::string out_;
};

class Reader {
   public:
    explicit Reader(const std::string& in) : in_(in) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, in_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string raw(std::size_t n) {
        need(n);
        std::string s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::string string() { return raw(get<std::uint32_t>()); }
    bool at_end() const { return pos_ == in_.size(); }

   private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw FormatError("checkpoint truncated at byte " + std::to_string(pos_));
    }
    const std::string& in_;
    std::size_t pos_ = 0;
};

void put_tensor(Writer& w, const std::string& name, const Shape& shape, std::span<const double> data) {
    w.string(name);
    w.put(static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) w.put(static_cast<std::uint64_t>(d));
    for (double v : data) w.put(v);
}

struct Record {
    std::string name;
    Shape shape;
    std::vector<double> data;
};

}  // namespace

std::string encode_checkpoint(const TrainState& state) {
    Writer w;
    w.bytes(kCheckpointMagic, sizeof kCheckpointMagic);
    w.put(kCheckpointVersion);
    w.string(state.config.to_config().render());
    w.put(state.epoch);
    w.put(state.next_batch);
    w.put(state.adam.step);
    w.put(state.config.seed);

    const auto& params = state.model.parameters();
    if (state.adam.m.size() != params.size() || state.adam.v.size() != params.size()) {
        throw ShapeError("checkpoint: optimizer state does not match the model");
    }
    w.put(static_cast<std::uint32_t>(3 * params.size()));
    for (const auto& p : params) put_tensor(w, "param/" + p.name, p.tensor.shape(), p.tensor.data());
    for (std::size_t k = 0; k < params.size(); ++k)
        put_tensor(w, "adam.m/" + params[k].name, params[k].tensor.shape(), state.adam.m[k]);
    for (std::size_t k = 0; k < params.size(); ++k)
        put_tensor(w, "adam.v/" + params[k].name, params[k].tensor.shape(), state.adam.v[k]);
    return w.take();
}

TrainState decode_checkpoint(const std::string& bytes) {
    Reader r(bytes);
    if (bytes.size() < sizeof kCheckpointMagic ||
        std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0) {
        throw FormatError("checkpoint: bad magic bytes");
    }
    r.raw(sizeof kCheckpointMagic);
    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw VersionError("checkpoint: format version " + std::to_string(version) + ", expected " +
                           std::to_string(kCheckpointVersion));
    }
    const TrainConfig config = TrainConfig::from_config(KeyValueConfig::parse(r.string()));
    const auto epoch = r.get<std::uint64_t>();
    const auto next_batch = r.get<std::uint64_t>();
    const auto adam_step = r.get<std::uint64_t>();
    const auto rng_seed = r.get<std::uint64_t>();
    if (rng_seed != config.seed) throw FormatError("checkpoint: RNG seed disagrees with config");

    const auto count = r.get<std::uint32_t>();
    std::vector<Record> records;
    for (std::uint32_t i = 0; i < count; ++i) {
        Record rec;
        rec.name = r.string();
        const auto rank = r.get<std::uint32_t>();
        if (rank > 8) throw FormatError("checkpoint: implausible rank for '" + rec.name + "'");
        for (std::uint32_t d = 0; d < rank; ++d) rec.shape.push_back(r.get<std::uint64_t>());
        const std::size_t n = shape_numel(rec.shape);
        if (n > bytes.size() / sizeof(double)) throw FormatError("checkpoint truncated in '" + rec.name + "'");
        rec.data.resize(n);
        for (double& v : rec.data) v = r.get<double>();
        records.push_back(std::move(rec));
    }
    if (!r.at_end()) throw FormatError("checkpoint: trailing bytes");

    TrainState state;
    state.config = config;
    state.model = VelocityModel::init(config.seed, config.model);
    const auto& params = state.model.parameters();
    if (records.size() != 3 * params.size()) {
        throw FormatError("checkpoint: expected " + std::to_string(3 * params.size()) + " tensors, found " +
                          std::to_string(records.size()));
    }
    std::vector<NamedTensor> values;
    state.adam.step = adam_step;
    for (std::size_t k = 0; k < params.size(); ++k) {
        const std::string& name = params[k].name;
        const Record* rows[3] = {&records[k], &records[params.size() + k], &records[2 * params.size() + k]};
        const char* prefixes[3] = {"param/", "adam.m/", "adam.v/"};
        for (int j = 0; j < 3; ++j) {
            if (rows[j]->name != prefixes[j] + name || rows[j]->shape != params[k].tensor.shape()) {
                throw FormatError("checkpoint: tensor '" + rows[j]->name + "' does not match '" + prefixes[j] +
                                  name + "' " + shape_to_string(params[k].tensor.shape()));
            }
        }
        values.push_back({name, Tensor(rows[0]->shape, rows[0]->data)});
        state.adam.m.push_back(rows[1]->data);
        state.adam.v.push_back(rows[2]->data);
    }
    state.model.load_parameters(values);
    state.epoch = epoch;
    state.next_batch = next_batch;
    return state;
}

void save_checkpoint(const std::filesystem::path& path, const TrainState& state) {
    const std::string bytes = encode_checkpoint(state);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing checkpoint '" + path.string() + "'");
}

TrainState load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return decode_checkpoint(buf.str());
}

}  // namespace trigcm
