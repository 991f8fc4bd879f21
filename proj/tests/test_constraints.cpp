// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "mssteer/constraints.hpp"

using namespace mssteer;

namespace {

ConstraintSet sample_set() {
    ConstraintSet set;
    set.items.push_back(XlPositive{{"A", 1}, {"B", 2}, 0.0, 30.0});
    set.items.push_back(XlNegative{{"A", 3}, {"B", 4}, 25.0});
    set.items.push_back(HdxProxy{{"A", 5}, "B", 0.4});
    set.items.push_back(HdxBurial{{"B", 6}, 0.9});
    return set;
}

}  // namespace

TEST_CASE("family tagging") {
    const ConstraintSet set = sample_set();
    CHECK(family_of(set.items[0]) == ConstraintFamily::xl_pos);
    CHECK(family_of(set.items[1]) == ConstraintFamily::xl_neg);
    CHECK(family_of(set.items[2]) == ConstraintFamily::hdx_proxy);
    CHECK(family_of(set.items[3]) == ConstraintFamily::hdx_burial);
    CHECK(std::string(family_name(ConstraintFamily::xl_pos)) == "xl_pos");
    CHECK(std::string(family_name(ConstraintFamily::hdx_burial)) == "hdx_burial");
    CHECK(set.has_family(ConstraintFamily::xl_neg));
    CHECK(set.family_count(ConstraintFamily::xl_pos) == 1);
}

TEST_CASE("subset keeps order and provenance alignment") {
    ConstraintSet set = sample_set();
    set.provenance = {"planted", "planted", "false", "planted"};
    const ConstraintSet sub = set.subset({0, 2});
    REQUIRE(sub.size() == 2);
    CHECK(family_of(sub.items[1]) == ConstraintFamily::hdx_proxy);
    REQUIRE(sub.provenance.size() == 2);
    CHECK(sub.provenance[0] == "planted");
    CHECK(sub.provenance[1] == "false");
}

TEST_CASE("append pads provenance when mixing labeled and unlabeled sets") {
    ConstraintSet labeled = sample_set();
    labeled.provenance = {"planted", "planted", "planted", "planted"};
    ConstraintSet unlabeled = sample_set();
    unlabeled.provenance.clear();

    ConstraintSet merged = unlabeled;
    merged.append(labeled);
    REQUIRE(merged.size() == 8);
    REQUIRE(merged.provenance.size() == 8);
    CHECK(merged.provenance[0].empty());
    CHECK(merged.provenance[4] == "planted");
}

TEST_CASE("validate rejects out-of-range parameters") {
    ConstraintSet bad;
    bad.items.push_back(XlPositive{{"A", 1}, {"B", 2}, 10.0, 5.0});  // d_min > d_max
    CHECK_THROWS_AS(bad.validate(), config_error);

    ConstraintSet bad_delta;
    bad_delta.items.push_back(HdxBurial{{"A", 1}, 1.5});
    CHECK_THROWS_AS(bad_delta.validate(), config_error);

    ConstraintSet bad_prov = sample_set();
    bad_prov.provenance = {"planted"};  // wrong length
    CHECK_THROWS_AS(bad_prov.validate(), config_error);

    CHECK_NOTHROW(sample_set().validate());
}

TEST_CASE("constraints json round trip") {
    ConstraintSet set = sample_set();
    set.provenance = {"planted", "planted", "false", "planted"};
    const std::string text = constraints_to_json(set);
    CHECK(text.find("ms-steer/constraints/1") != std::string::npos);

    const ConstraintSet back = constraints_from_json(text);
    REQUIRE(back.size() == set.size());
    for (std::size_t i = 0; i < set.size(); ++i)
        CHECK(family_of(back.items[i]) == family_of(set.items[i]));
    const auto& xl = std::get<XlPositive>(back.items[0]);
    CHECK(xl.i.chain_id == "A");
    CHECK(xl.j.seq_number == 2);
    CHECK(xl.d_max == 30.0);
    const auto& proxy = std::get<HdxProxy>(back.items[2]);
    CHECK(proxy.partner_chain == "B");
    CHECK(proxy.delta == 0.4);
    REQUIRE(back.provenance.size() == 4);
    CHECK(back.provenance[2] == "false");
}

TEST_CASE("constraints json rejects wrong format and unknown families") {
    CHECK_THROWS_AS(constraints_from_json("{}"), parse_error);
    CHECK_THROWS_AS(constraints_from_json("not json at all"), parse_error);
    CHECK_THROWS_AS(
        constraints_from_json(R"({"format":"ms-steer/constraints/9","constraints":[]})"),
        parse_error);
    CHECK_THROWS_AS(constraints_from_json(
                        R"({"format":"ms-steer/constraints/1",
                            "constraints":[{"type":"mystery"}]})"),
                    parse_error);
}

TEST_CASE("provenance sidecar round trip") {
    ConstraintSet set = sample_set();
    set.provenance = {"planted", "false", "planted", "planted"};
    const std::string sidecar = provenance_to_json(set);
    CHECK(sidecar.find("ms-steer/provenance/1") != std::string::npos);

    ConstraintSet bare = sample_set();
    apply_provenance_json(bare, sidecar);
    REQUIRE(bare.provenance.size() == 4);
    CHECK(bare.provenance[1] == "false");

    ConstraintSet short_set;
    short_set.items.push_back(XlPositive{{"A", 1}, {"B", 2}, 0.0, 30.0});
    CHECK_THROWS_AS(apply_provenance_json(short_set, sidecar), parse_error);
}
