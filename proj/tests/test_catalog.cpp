#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symred/catalog.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

using namespace symred;

static std::vector<CaseRecord> bundled() {
    static std::vector<CaseRecord> recs = load_catalog_dir(default_catalog_dir());
    return recs;
}

TEST_CASE("the bundled catalog loads with the frozen record count") {
    auto recs = bundled();
    CHECK(recs.size() == 100);
}

TEST_CASE("coverage manifest: every claim family is represented") {
    std::map<std::string, int> by_anchor;
    std::set<std::string> ids;
    for (auto& r : bundled()) {
        ++by_anchor[r.anchor];
        ids.insert(r.id);
    }
    for (const char* anchor : {"ode2", "airy", "mixedjet", "wave1", "wave2", "riccati", "kdv",
                               "prop1", "med", "alg", "src5", "src5sym", "src5inv", "src3",
                               "inherited", "base"})
        CHECK_MESSAGE(by_anchor[anchor] >= 1, anchor);

    // ids other suites rely on
    for (const char* id :
         {"ode2-q1", "ode2-q2-flow", "ode2-reduce", "ode2-sol-pos", "airy-neg-q1", "airy-q3-flow",
          "airy-q4", "airy-comm-paper", "airy-comm-abelian", "mixedjet-y1", "mixedjet-y2",
          "mixedjet-y3-u", "mixedjet-reduce", "wave1-q1", "wave1-q2", "wave1-solution",
          "wave2-q1", "wave2-q2", "wave2-solution", "riccati-q-flow", "riccati-q-corrupt",
          "kdv-x", "kdv-q1", "kdv-q2", "kdv-reduce", "med-i", "med-ii", "med-iii", "med-iv",
          "med-v", "med-vi", "med-alg", "src5-reduce", "src5-sol-1", "src5-sol-2", "src5-sol-3",
          "src5-sol-4", "src5-sol-5", "src3-reduce", "src3-a8sol", "src3-a8sol-noninv",
          "src3-inherited-q1", "src3-inherited-q2", "src3-comm", "base-reduce", "base-sol",
          "base-combo", "base-x1x3", "base-abelian"})
        CHECK_MESSAGE(ids.count(id) == 1, id);
}

TEST_CASE("the proposition family filter returns exactly the eleven entries") {
    auto sel = select_cases(bundled(), "prop1-*");
    CHECK(sel.size() == 11);
    // stable ordering by id
    for (size_t i = 1; i < sel.size(); ++i) CHECK(sel[i - 1].id < sel[i].id);
}

TEST_CASE("kind filtering includes the commutator records") {
    auto sel = select_cases(bundled(), "", "commutator-check");
    bool found = false;
    for (auto& r : sel)
        if (r.id == "airy-comm-paper") found = true;
    CHECK(found);
    CHECK(select_cases(bundled(), "none-matching-*").empty());
}

TEST_CASE("typo-suspect variant groups have at least two members") {
    std::map<std::string, int> groups;
    for (auto& r : bundled())
        if (!r.typo_group.empty()) ++groups[r.typo_group];
    CHECK(groups.size() >= 8);
    for (auto& [g, n] : groups) CHECK_MESSAGE(n >= 2, g);
}

TEST_CASE("records round-trip through serialization unchanged") {
    namespace fs = std::filesystem;
    auto recs = bundled();
    fs::path tmp = fs::temp_directory_path() / "symred_roundtrip.cat";
    {
        std::ofstream out(tmp);
        for (auto& r : recs) out << r.serialize() << "\n";
    }
    auto back = load_catalog_file(tmp.string());
    REQUIRE(back.size() == recs.size());
    for (size_t i = 0; i < recs.size(); ++i) {
        CHECK(back[i].id == recs[i].id);
        CHECK(back[i].raw_lines == recs[i].raw_lines);
    }
    fs::remove(tmp);
}

TEST_CASE("loader errors carry the case id and field") {
    namespace fs = std::filesystem;
    fs::path tmp = fs::temp_directory_path() / "symred_badcase.cat";

    SUBCASE("empty file loads to an empty list") {
        std::ofstream(tmp) << "# nothing here\n";
        CHECK(load_catalog_file(tmp.string()).empty());
    }
    SUBCASE("undeclared symbol is a validation error") {
        std::ofstream(tmp) << "[case]\nid = bad-sym\nkind = symmetry-check\n"
                           << "[decls]\nindependent x t\nfield u : x t\n"
                           << "[manifold]\nu_xx = nosuchparam*u\n";
        CHECK_THROWS_WITH_AS(load_catalog_file(tmp.string()),
                             doctest::Contains("bad-sym"), CatalogError);
    }
    SUBCASE("duplicate ids are rejected") {
        std::ofstream(tmp) << "[case]\nid = dup\nkind = symmetry-check\n"
                           << "[decls]\nindependent x t\nfield u : x t\n"
                           << "[manifold]\nu_xx = u\n[operator]\neta = u\n[check]\nh = u_xx - u\n"
                           << "[case]\nid = dup\nkind = symmetry-check\n"
                           << "[decls]\nindependent x t\nfield u : x t\n"
                           << "[manifold]\nu_xx = u\n[operator]\neta = u\n[check]\nh = u_xx - u\n";
        CHECK_THROWS_WITH_AS(load_catalog_file(tmp.string()), doctest::Contains("duplicate"),
                             CatalogError);
    }
    SUBCASE("unknown kind is rejected") {
        std::ofstream(tmp) << "[case]\nid = bad-kind\nkind = frobnicate\n";
        CHECK_THROWS_AS(load_catalog_file(tmp.string()), CatalogError);
    }
    fs::remove(tmp);
}

TEST_CASE("glob matching") {
    CHECK(glob_match("prop1-*", "prop1-a"));
    CHECK(!glob_match("prop1-*", "p1mut-a"));
    CHECK(glob_match("*-q?", "airy-q4"));
    CHECK(glob_match("*", "anything"));
}
