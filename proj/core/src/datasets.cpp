#include "gbho/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <random>
#include <vector>

namespace gbho {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                      std::istreambuf_iterator<char>());
}

std::uint32_t read_u32_be(const std::vector<unsigned char>& buf, std::size_t offset,
                          const std::string& path) {
    if (offset + 4 > buf.size()) {
        throw TruncatedFile("truncated IDX header: " + path);
    }
    return (std::uint32_t(buf[offset]) << 24) | (std::uint32_t(buf[offset + 1]) << 16) |
           (std::uint32_t(buf[offset + 2]) << 8) | std::uint32_t(buf[offset + 3]);
}

LabeledSet gather(const LabeledSet& set, const std::vector<Eigen::Index>& idx) {
    LabeledSet out;
    out.kind = set.kind;
    out.classes = set.classes;
    out.features.resize(static_cast<Eigen::Index>(idx.size()), set.dim());
    out.labels.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = set.features.row(idx[i]);
        out.labels(static_cast<Eigen::Index>(i)) = set.labels(idx[i]);
    }
    return out;
}

// Per-class allocation summing exactly to `want`, proportional to pool sizes
// (largest-remainder rounding), capped by what each pool still holds.
std::vector<Eigen::Index> allocate_per_class(const std::vector<Eigen::Index>& available,
                                             Eigen::Index total_available, Eigen::Index want) {
    const std::size_t k = available.size();
    std::vector<Eigen::Index> take(k, 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    Eigen::Index assigned = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double ideal =
            double(want) * double(available[c]) / double(std::max<Eigen::Index>(total_available, 1));
        take[c] = std::min<Eigen::Index>(available[c], static_cast<Eigen::Index>(std::floor(ideal)));
        assigned += take[c];
        remainders.emplace_back(ideal - std::floor(ideal), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    // hand out the rest by largest fractional part, then by spare capacity
    while (assigned < want) {
        bool progressed = false;
        for (const auto& [frac, c] : remainders) {
            if (assigned == want) break;
            if (take[c] < available[c]) {
                ++take[c];
                ++assigned;
                progressed = true;
            }
        }
        if (!progressed) break;
    }
    return take;
}

} // namespace

LabeledSet load_idx(const std::string& images_path, const std::string& labels_path) {
    const auto img = read_file(images_path);
    const auto lab = read_file(labels_path);

    if (read_u32_be(img, 0, images_path) != kImageMagic) {
        throw BadMagic("bad IDX image magic: " + images_path);
    }
    if (read_u32_be(lab, 0, labels_path) != kLabelMagic) {
        throw BadMagic("bad IDX label magic: " + labels_path);
    }
    const std::uint32_t n_images = read_u32_be(img, 4, images_path);
    const std::uint32_t rows = read_u32_be(img, 8, images_path);
    const std::uint32_t cols = read_u32_be(img, 12, images_path);
    const std::uint32_t n_labels = read_u32_be(lab, 4, labels_path);
    if (n_images != n_labels) {
        throw CountMismatch("IDX image/label counts differ: " + std::to_string(n_images) + " vs " +
                            std::to_string(n_labels));
    }
    const std::size_t pixels = std::size_t(rows) * cols;
    if (img.size() < 16 + std::size_t(n_images) * pixels) {
        throw TruncatedFile("truncated IDX image data: " + images_path);
    }
    if (lab.size() < 8 + std::size_t(n_labels)) {
        throw TruncatedFile("truncated IDX label data: " + labels_path);
    }

    LabeledSet set;
    set.kind = TaskKind::classification;
    set.features.resize(n_images, static_cast<Eigen::Index>(pixels));
    set.labels.resize(n_images);
    for (std::uint32_t i = 0; i < n_images; ++i) {
        const unsigned char* px = img.data() + 16 + std::size_t(i) * pixels;
        for (std::size_t p = 0; p < pixels; ++p) {
            set.features(i, static_cast<Eigen::Index>(p)) = double(px[p]) / 255.0;
        }
        set.labels(i) = double(lab[8 + i]);
    }
    set.classes = n_images > 0 ? static_cast<int>(set.labels.maxCoeff()) + 1 : 0;
    return set;
}

std::pair<LabeledSet, LabeledSet> subsample_split(const LabeledSet& set, Eigen::Index n,
                                                  const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) ||
        !(spec.valid_fraction > 0.0 && spec.valid_fraction < 1.0) ||
        spec.train_fraction + spec.valid_fraction > 1.0 + 1e-12) {
        throw ValidationError("subsample_split: fractions must lie in (0,1) and sum to at most 1");
    }
    if (n > set.size()) {
        throw InsufficientData("subsample_split: requested " + std::to_string(n) + " of " +
                               std::to_string(set.size()) + " rows");
    }
    const auto n_train = static_cast<Eigen::Index>(std::floor(double(n) * spec.train_fraction));
    const auto n_valid = static_cast<Eigen::Index>(std::floor(double(n) * spec.valid_fraction));

    std::mt19937_64 rng(spec.seed);

    if (set.kind == TaskKind::regression || set.classes <= 1) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(set.size()));
        std::iota(idx.begin(), idx.end(), Eigen::Index(0));
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<Eigen::Index> tr(idx.begin(), idx.begin() + n_train);
        std::vector<Eigen::Index> va(idx.begin() + n_train, idx.begin() + n_train + n_valid);
        return {gather(set, tr), gather(set, va)};
    }

    // stratified: shuffle each class pool, then draw train and valid quotas
    std::vector<std::vector<Eigen::Index>> pools(static_cast<std::size_t>(set.classes));
    for (Eigen::Index i = 0; i < set.size(); ++i) {
        pools[static_cast<std::size_t>(set.labels(i))].push_back(i);
    }
    for (auto& pool : pools) {
        std::shuffle(pool.begin(), pool.end(), rng);
    }
    std::vector<Eigen::Index> sizes(pools.size());
    for (std::size_t c = 0; c < pools.size(); ++c) {
        sizes[c] = static_cast<Eigen::Index>(pools[c].size());
    }
    const auto train_take = allocate_per_class(sizes, set.size(), n_train);
    std::vector<Eigen::Index> left(pools.size());
    for (std::size_t c = 0; c < pools.size(); ++c) {
        left[c] = sizes[c] - train_take[c];
    }
    const auto valid_take = allocate_per_class(left, set.size() - n_train, n_valid);

    std::vector<Eigen::Index> tr, va;
    tr.reserve(static_cast<std::size_t>(n_train));
    va.reserve(static_cast<std::size_t>(n_valid));
    for (std::size_t c = 0; c < pools.size(); ++c) {
        tr.insert(tr.end(), pools[c].begin(), pools[c].begin() + train_take[c]);
        va.insert(va.end(), pools[c].begin() + train_take[c],
                  pools[c].begin() + train_take[c] + valid_take[c]);
    }
    std::shuffle(tr.begin(), tr.end(), rng);
    std::shuffle(va.begin(), va.end(), rng);
    return {gather(set, tr), gather(set, va)};
}

} // namespace gbho
