#include <doctest.h>

#include <malloc.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <numbers>
#include <numeric>
#include <vector>

#include "vmfexp/errors.hpp"
#include "vmfexp/index.hpp"

using namespace vmfexp;

namespace {

std::shared_ptr<const EmbeddingSet> uniform_set(std::size_t n, int d, std::uint64_t seed) {
    RandomSource rng(seed);
    std::vector<UnitVector> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(sample_uniform_sphere(d, rng));
    return std::make_shared<const EmbeddingSet>(EmbeddingSet::from_vectors(xs));
}

double naive_dot(std::span<const double> a, std::span<const double> b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
    return static_cast<double>(s);
}

// All (score, id) pairs, best first.
std::vector<NeighborResult> naive_ranking(const EmbeddingSet& set, const UnitVector& q) {
    std::vector<NeighborResult> all;
    for (std::size_t r = 0; r < set.size(); ++r) all.push_back({set.id(r), naive_dot(q.coords(), set.row(r))});
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.score > b.score || (a.score == b.score && a.id < b.id);
    });
    return all;
}

std::filesystem::path temp_path(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

std::size_t heap_in_use() {
    const auto info = mallinfo2();
    return info.uordblks + info.hblkhd;
}

}  // namespace

TEST_CASE("a single-vector index always answers with that vector") {
    auto set = std::make_shared<const EmbeddingSet>(2, std::vector<double>{0.6, 0.8}, std::vector<ActionId>{42});
    const ExactIndex index(set);
    RandomSource rng(1);
    for (int i = 0; i < 20; ++i) CHECK(index.nearest(sample_uniform_sphere(2, rng)).id == 42);
}

TEST_CASE("embedding sets reject duplicate ids, bad norms and empty input") {
    CHECK_THROWS_AS(EmbeddingSet(2, {1, 0, 0, 1}, {7, 7}), DomainError);
    CHECK_THROWS_AS(EmbeddingSet(2, {1, 0, 0, 2}, {1, 2}), DomainError);
    CHECK_THROWS_AS(EmbeddingSet(2, {}, {}), DomainError);
    CHECK_THROWS_AS(EmbeddingSet(2, {1, 0, 0}, {1, 2}), DomainError);
}

TEST_CASE("nearest returns the vector itself and resolves the circle example") {
    const auto set = uniform_set(50, 5, 3);
    const ExactIndex index(set);
    for (std::size_t r = 0; r < set->size(); ++r) CHECK(index.nearest(set->vector(r)).id == set->id(r));

    const ExactIndex circle(std::make_shared<const EmbeddingSet>(2, std::vector<double>{1, 0, 0, 1},
                                                                 std::vector<ActionId>{10, 20}));
    const double a = 10.0 * std::numbers::pi / 180.0;
    CHECK(circle.nearest(UnitVector({std::cos(a), std::sin(a)})).id == 10);
    CHECK_THROWS_AS(circle.nearest(UnitVector({1, 0, 0})), DomainError);
}

TEST_CASE("ties go to the smallest id") {
    const ExactIndex index(std::make_shared<const EmbeddingSet>(
        2, std::vector<double>{0, 1, 1, 0, 1, 0}, std::vector<ActionId>{1, 9, 4}));
    CHECK(index.nearest(UnitVector({1, 0})).id == 4);
    const auto top = index.top_k(UnitVector({1, 0}), 2);
    CHECK(top[0].id == 4);
    CHECK(top[1].id == 9);
}

TEST_CASE("exact index agrees with a naive scan") {
    const auto set = uniform_set(1000, 8, 11);
    const ExactIndex index(set);
    RandomSource rng(12);
    int nearest_mismatch = 0;
    int topk_mismatch = 0;
    for (int q = 0; q < 1000; ++q) {
        const UnitVector query = sample_uniform_sphere(8, rng);
        const auto ranking = naive_ranking(*set, query);
        if (index.nearest(query).id != ranking[0].id) ++nearest_mismatch;
        const auto top = index.top_k(query, 10);
        for (std::size_t k = 0; k < 10; ++k) {
            if (top[k].id != ranking[k].id) ++topk_mismatch;
            if (k > 0) CHECK(top[k].score <= top[k - 1].score);
            CHECK(top[k].score >= ranking[10].score);
            CHECK(std::abs(top[k].score) <= 1.0 + 1e-6);
        }
    }
    CHECK(nearest_mismatch == 0);
    CHECK(topk_mismatch == 0);
}

TEST_CASE("top_k edge cases") {
    const auto set = uniform_set(40, 3, 5);
    const ExactIndex index(set);
    RandomSource rng(6);
    const UnitVector q = sample_uniform_sphere(3, rng);
    const auto all = index.top_k(q, 40);
    CHECK(all.size() == 40);
    std::vector<ActionId> ids;
    for (const auto& r : all) ids.push_back(r.id);
    std::sort(ids.begin(), ids.end());
    CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
    CHECK(index.top_k(q, 1)[0].id == index.nearest(q).id);
    CHECK_THROWS_AS(index.top_k(q, 0), DomainError);
    CHECK_THROWS_AS(index.top_k(q, 41), DomainError);
}

TEST_CASE("batched nearest matches one-at-a-time queries") {
    const auto set = uniform_set(3000, 25, 21);
    const ExactIndex index(set);
    RandomSource rng(22);
    std::vector<UnitVector> qs;
    std::vector<double> flat;
    for (int i = 0; i < 77; ++i) {
        qs.push_back(sample_uniform_sphere(25, rng));
        flat.insert(flat.end(), qs.back().coords().begin(), qs.back().coords().end());
    }
    const auto batch = index.nearest_batch(flat);
    REQUIRE(batch.size() == qs.size());
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const auto one = index.nearest(qs[i]);
        CHECK(batch[i].id == one.id);
        CHECK(batch[i].score == doctest::Approx(one.score).epsilon(1e-14));
    }
    flat.pop_back();
    CHECK_THROWS_AS(index.nearest_batch(flat), DomainError);
}

TEST_CASE("exact index storage stays close to the raw vectors") {
    const std::size_t n = 1000000;
    const int d = 25;
    std::vector<double> rows(n * d, 0.0);
    for (std::size_t r = 0; r < n; ++r) rows[r * d + r % d] = 1.0;
    std::vector<ActionId> ids(n);
    std::iota(ids.begin(), ids.end(), ActionId{0});
    const std::size_t raw_bytes = rows.size() * sizeof(double);
    const std::size_t before = heap_in_use();
    {
        auto set = std::make_shared<const EmbeddingSet>(d, std::move(rows), std::move(ids));
        const ExactIndex index(set);
        const std::size_t held = heap_in_use() - before;
        CHECK(static_cast<double>(held) <= 1.5 * static_cast<double>(raw_bytes));
    }
}

TEST_CASE("approximate index with one list is exact") {
    const auto set = uniform_set(2000, 6, 31);
    const ExactIndex exact(set);
    const ApproxIndex approx = build_approx(set, 1, 1);
    RandomSource rng(32);
    for (int q = 0; q < 200; ++q) {
        const UnitVector query = sample_uniform_sphere(6, rng);
        const auto a = approx.top_k(query, 10);
        const auto e = exact.top_k(query, 10);
        for (std::size_t k = 0; k < 10; ++k) CHECK(a[k].id == e[k].id);
        CHECK(approx.nearest(query).id == exact.nearest(query).id);
    }
}

TEST_CASE("approximate index parameter checks") {
    const auto set = uniform_set(100, 4, 41);
    CHECK_THROWS_AS(build_approx(set, 8, 9), DomainError);
    CHECK_THROWS_AS(build_approx(set, 101, 1), DomainError);
    CHECK_THROWS_AS(build_approx(set, 0, 0), DomainError);
    ApproxIndex approx = build_approx(set, 8, 2);
    CHECK_THROWS_AS(approx.set_probes(9), DomainError);
    CHECK_THROWS_AS(approx.set_probes(0), DomainError);
}

TEST_CASE("approximate index reaches recall 0.9 on 1e5 uniform vectors") {
    const auto set = uniform_set(100000, 25, 51);
    const ExactIndex exact(set);
    ApproxIndex approx = build_approx(set, 256, 16);
    RandomSource rng(52);
    std::vector<UnitVector> queries;
    for (int q = 0; q < 1000; ++q) queries.push_back(sample_uniform_sphere(25, rng));
    double recall = recall_at_k(approx, exact, queries, 10);
    std::size_t probes = 16;
    while (recall < 0.9 && probes < 256) {
        probes *= 2;
        approx.set_probes(probes);
        recall = recall_at_k(approx, exact, queries, 10);
    }
    MESSAGE("probes " << probes << " recall@10 " << recall);
    CHECK(recall >= 0.9);
}

TEST_CASE("recall is monotone in probes and 1 for a full scan") {
    const auto set = uniform_set(20000, 16, 61);
    const ExactIndex exact(set);
    ApproxIndex approx = build_approx(set, 64, 1);
    RandomSource rng(62);
    std::vector<UnitVector> queries;
    for (int q = 0; q < 300; ++q) queries.push_back(sample_uniform_sphere(16, rng));
    double previous = 0.0;
    for (std::size_t probes : {1, 2, 4, 8, 16, 32, 64}) {
        approx.set_probes(probes);
        const double r = recall_at_k(approx, exact, queries, 10);
        CHECK(r >= previous);
        previous = r;
    }
    CHECK(previous == 1.0);
    approx.set_probes(64);
    CHECK(recall_at_k(approx, exact, {queries[0]}, 1) == 1.0);

    const ExactIndex other(uniform_set(10000, 16, 63));
    CHECK_THROWS_AS(recall_at_k(approx, other, queries, 10), DomainError);
}

TEST_CASE("snapshot round trip is bit exact") {
    const auto set = uniform_set(500, 7, 71);
    const auto path = temp_path("vmfexp_index_snapshot.bin");
    write_snapshot(path, *set);
    const EmbeddingSet first = read_snapshot(path);
    CHECK(first.size() == set->size());
    CHECK(first.dim() == 7);
    CHECK(first.ids() == set->ids());
    for (std::size_t i = 0; i < set->rows().size(); ++i) {
        CHECK(first.rows()[i] == static_cast<double>(static_cast<float>(set->rows()[i])));
    }

    const auto again = temp_path("vmfexp_index_snapshot2.bin");
    write_snapshot(again, first);
    const EmbeddingSet second = read_snapshot(again);
    CHECK(second.rows() == first.rows());
    std::ifstream a(path, std::ios::binary);
    std::ifstream b(again, std::ios::binary);
    const std::vector<char> bytes_a((std::istreambuf_iterator<char>(a)), {});
    const std::vector<char> bytes_b((std::istreambuf_iterator<char>(b)), {});
    CHECK(bytes_a == bytes_b);
    CHECK(std::string(bytes_a.begin(), bytes_a.begin() + 8) == "VMFXIDX1");
    CHECK(bytes_a.size() == 8 + 4 + 8 + 4 + 500 * 7 * 4 + 500 * 8);
    std::filesystem::remove(path);
    std::filesystem::remove(again);
}

TEST_CASE("corrupt snapshots are rejected") {
    const auto path = temp_path("vmfexp_bad_snapshot.bin");
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOTMAGIC and some more bytes";
    }
    CHECK_THROWS_AS(read_snapshot(path), IoError);

    const auto set = uniform_set(10, 3, 81);
    write_snapshot(path, *set);
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
    CHECK_THROWS_AS(read_snapshot(path), IoError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_snapshot(path), IoError);
}
