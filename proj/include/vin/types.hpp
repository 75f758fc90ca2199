#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vin {

// Sentinel class id for points excluded from supervision and evaluation.
inline constexpr int kIgnoreClass = -1;

enum class ClassKind { thing, stuff };

// Ordered class list; ids are positions, 0..size()-1.
class ClassTaxonomy {
public:
    struct Entry {
        std::string name;
        ClassKind kind;
    };

    ClassTaxonomy() = default;
    explicit ClassTaxonomy(std::vector<Entry> classes) : classes_(std::move(classes)) {
        bool has_thing = false, has_stuff = false;
        for (const auto& e : classes_) {
            (e.kind == ClassKind::thing ? has_thing : has_stuff) = true;
        }
        if (!has_thing || !has_stuff)
            throw std::invalid_argument("taxonomy needs at least one thing and one stuff class");
    }

    int num_classes() const { return static_cast<int>(classes_.size()); }
    const Entry& at(int id) const { return classes_.at(static_cast<std::size_t>(id)); }
    bool is_thing(int id) const { return at(id).kind == ClassKind::thing; }
    bool is_stuff(int id) const { return at(id).kind == ClassKind::stuff; }
    bool valid_id(int id) const { return id >= 0 && id < num_classes(); }

    std::vector<int> thing_ids() const {
        std::vector<int> out;
        for (int i = 0; i < num_classes(); ++i)
            if (is_thing(i)) out.push_back(i);
        return out;
    }
    std::vector<int> stuff_ids() const {
        std::vector<int> out;
        for (int i = 0; i < num_classes(); ++i)
            if (is_stuff(i)) out.push_back(i);
        return out;
    }

    const std::vector<Entry>& entries() const { return classes_; }

private:
    std::vector<Entry> classes_;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double intensity = 0.0;
};

// Flat point cloud with optional per-point annotation arrays.
// When present, each array has the same length as points.
struct PointCloud {
    std::vector<Point> points;
    std::vector<int> sem_label;        // class id or kIgnoreClass
    std::vector<double> sem_score;     // confidence in [0,1]
    std::vector<std::uint32_t> instance; // 0 = no instance

    std::size_t size() const { return points.size(); }

    bool has_labels() const { return sem_label.size() == points.size() && !points.empty(); }
    bool has_scores() const { return sem_score.size() == points.size() && !points.empty(); }

    void check_consistent() const {
        if (!sem_label.empty() && sem_label.size() != points.size())
            throw std::invalid_argument("sem_label length mismatch");
        if (!sem_score.empty() && sem_score.size() != points.size())
            throw std::invalid_argument("sem_score length mismatch");
        if (!instance.empty() && instance.size() != points.size())
            throw std::invalid_argument("instance length mismatch");
    }
};

// 7-DOF box: center, size, yaw about z. instance_id > 0.
struct BoundingBox7 {
    double cx = 0.0, cy = 0.0, cz = 0.0;
    double l = 1.0, w = 1.0, h = 1.0;
    double yaw = 0.0;
    int class_id = 0;
    double score = 1.0;
    std::uint32_t instance_id = 1;
};

struct LossWeights {
    double alpha_cls = 1.0;
    double alpha_reg = 0.25;
    double alpha_sem = 1.0;
};

// Closed-box containment: boundary counts as inside.
bool box_contains(const BoundingBox7& box, const Point& p);

} // namespace vin
