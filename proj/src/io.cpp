#include "vin/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace vin {

namespace {

static_assert(std::endian::native == std::endian::little,
              "formats are little-endian; byte-swapping not implemented");

void put_u16(std::ofstream& f, std::uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); }
void put_u32(std::ofstream& f, std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); }
void put_f32(std::ofstream& f, float v) { f.write(reinterpret_cast<const char*>(&v), 4); }

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : path_(path.string()) {
        f_.open(path, std::ios::binary);
        if (!f_) throw IoError("cannot open " + path_);
    }
    std::uint16_t u16() { return read<std::uint16_t>(); }
    std::uint32_t u32() { return read<std::uint32_t>(); }
    float f32() { return read<float>(); }

    void expect_magic(const char* magic) {
        char buf[4];
        f_.read(buf, 4);
        if (!f_) throw IoError(path_ + ": truncated magic", offset_);
        offset_ += 4;
        if (std::memcmp(buf, magic, 4) != 0)
            throw IoError(path_ + ": bad magic", 0);
    }
    void expect_eof() {
        f_.peek();
        if (!f_.eof()) throw IoError(path_ + ": trailing bytes", offset_);
    }

private:
    template <typename T>
    T read() {
        T v;
        f_.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!f_) throw IoError(path_ + ": truncated payload", offset_);
        offset_ += sizeof(T);
        return v;
    }
    std::string path_;
    std::ifstream f_;
    std::uint64_t offset_ = 0;
};

nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path.string() + ": " + e.what(), e.byte);
    }
}

void dump_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << j.dump(2) << '\n';
    if (!f) throw IoError("write failed: " + path.string());
}

} // namespace

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write("VINP", 4);
    put_u32(f, static_cast<std::uint32_t>(cloud.points.size()));
    for (const Point& p : cloud.points) {
        put_f32(f, static_cast<float>(p.x));
        put_f32(f, static_cast<float>(p.y));
        put_f32(f, static_cast<float>(p.z));
        put_f32(f, static_cast<float>(p.intensity));
    }
    if (!f) throw IoError("write failed: " + path.string());
}

PointCloud read_cloud(const std::filesystem::path& path) {
    Reader r(path);
    r.expect_magic("VINP");
    std::uint32_t n = r.u32();
    PointCloud cloud;
    cloud.points.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        Point p;
        p.x = r.f32();
        p.y = r.f32();
        p.z = r.f32();
        p.intensity = r.f32();
        cloud.points.push_back(p);
    }
    r.expect_eof();
    return cloud;
}

void write_labels(const std::filesystem::path& path, const LabelData& labels) {
    if (labels.sem_score.size() != labels.size() || labels.instance.size() != labels.size())
        throw std::invalid_argument("label arrays must have equal length");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write("VINL", 4);
    put_u32(f, static_cast<std::uint32_t>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        int c = labels.sem_label[i];
        put_u16(f, c == kIgnoreClass ? std::uint16_t{0xFFFF} : static_cast<std::uint16_t>(c));
        put_f32(f, static_cast<float>(labels.sem_score[i]));
        put_u32(f, labels.instance[i]);
    }
    if (!f) throw IoError("write failed: " + path.string());
}

LabelData read_labels(const std::filesystem::path& path) {
    Reader r(path);
    r.expect_magic("VINL");
    std::uint32_t n = r.u32();
    LabelData labels;
    labels.sem_label.reserve(n);
    labels.sem_score.reserve(n);
    labels.instance.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        std::uint16_t c = r.u16();
        labels.sem_label.push_back(c == 0xFFFF ? kIgnoreClass : static_cast<int>(c));
        labels.sem_score.push_back(r.f32());
        labels.instance.push_back(r.u32());
    }
    r.expect_eof();
    return labels;
}

LabelData labels_of(const PointCloud& cloud) {
    cloud.check_consistent();
    LabelData labels;
    labels.sem_label = cloud.sem_label;
    labels.sem_score = cloud.sem_score;
    labels.instance = cloud.instance;
    std::size_t n = cloud.size();
    if (labels.sem_label.empty()) labels.sem_label.assign(n, kIgnoreClass);
    if (labels.sem_score.empty()) labels.sem_score.assign(n, 0.0);
    if (labels.instance.empty()) labels.instance.assign(n, 0);
    return labels;
}

void apply_labels(PointCloud& cloud, const LabelData& labels) {
    if (labels.size() != cloud.size())
        throw std::invalid_argument("label count does not match cloud");
    cloud.sem_label = labels.sem_label;
    cloud.sem_score = labels.sem_score;
    cloud.instance = labels.instance;
}

void write_boxes(const std::filesystem::path& path, const std::vector<BoundingBox7>& boxes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const BoundingBox7& b : boxes) {
        arr.push_back({b.cx, b.cy, b.cz, b.l, b.w, b.h, b.yaw,
                       static_cast<double>(b.class_id), b.score,
                       static_cast<double>(b.instance_id)});
    }
    dump_json(path, nlohmann::json{{"boxes", arr}});
}

std::vector<BoundingBox7> read_boxes(const std::filesystem::path& path) {
    nlohmann::json j = load_json(path);
    if (!j.contains("boxes") || !j["boxes"].is_array())
        throw IoError(path.string() + ": missing boxes array");
    std::vector<BoundingBox7> boxes;
    for (const auto& row : j["boxes"]) {
        if (!row.is_array() || row.size() != 10)
            throw IoError(path.string() + ": box row must have 10 scalars");
        BoundingBox7 b;
        b.cx = row[0];
        b.cy = row[1];
        b.cz = row[2];
        b.l = row[3];
        b.w = row[4];
        b.h = row[5];
        b.yaw = row[6];
        b.class_id = static_cast<int>(row[7].get<double>());
        b.score = row[8];
        b.instance_id = static_cast<std::uint32_t>(row[9].get<double>());
        boxes.push_back(b);
    }
    return boxes;
}

void write_params(const std::filesystem::path& path, const HeadParams& params) {
    params.check_shapes();
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < params.num_layers(); ++l) {
        const Eigen::MatrixXd& w = params.weights[l];
        std::vector<double> flat; // row-major
        flat.reserve(static_cast<std::size_t>(w.size()));
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
        std::vector<double> bias(params.biases[l].data(),
                                 params.biases[l].data() + params.biases[l].size());
        layers.push_back({{"rows", w.rows()}, {"cols", w.cols()},
                          {"weights", flat}, {"bias", bias}});
    }
    dump_json(path, nlohmann::json{{"layers", layers}});
}

HeadParams read_params(const std::filesystem::path& path) {
    nlohmann::json j = load_json(path);
    if (!j.contains("layers") || !j["layers"].is_array())
        throw IoError(path.string() + ": missing layers array");
    HeadParams params;
    for (const auto& layer : j["layers"]) {
        Eigen::Index rows = layer.at("rows");
        Eigen::Index cols = layer.at("cols");
        const auto& flat = layer.at("weights");
        const auto& bias = layer.at("bias");
        if (static_cast<Eigen::Index>(flat.size()) != rows * cols ||
            static_cast<Eigen::Index>(bias.size()) != rows)
            throw IoError(path.string() + ": weight count mismatch");
        Eigen::MatrixXd w(rows, cols);
        std::size_t idx = 0;
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = flat[idx++];
        Eigen::VectorXd b(rows);
        for (Eigen::Index r = 0; r < rows; ++r) b(r) = bias[static_cast<std::size_t>(r)];
        params.weights.push_back(std::move(w));
        params.biases.push_back(std::move(b));
    }
    params.check_shapes();
    return params;
}

} // namespace vin
