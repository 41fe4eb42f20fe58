#include <doctest.h>

#include <sstream>

#include "ctg/dataio.hpp"
#include "ctg/errors.hpp"
#include "helpers.hpp"

using namespace ctg;

TEST_CASE("parse_record basic single-column") {
    std::istringstream in("fhr\n140\n141\n0\n139\n");
    const Record rec = parse_record(in, "r1");
    CHECK(rec.fhr == std::vector<double>{140, 141, 0, 139});
    CHECK(rec.length() == 4);
    CHECK(!rec.uc.has_value());
}

TEST_CASE("parse_record two-column keeps uc") {
    std::istringstream in("fhr,uc\n120,10\n121,12\n");
    const Record rec = parse_record(in, "r2");
    CHECK(rec.fhr == std::vector<double>{120, 121});
    REQUIRE(rec.uc.has_value());
    CHECK(*rec.uc == std::vector<double>{10, 12});
}

TEST_CASE("parse_record error paths") {
    std::istringstream bad_value("fhr\n140\nabc\n");
    CHECK_THROWS_WITH_AS(parse_record(bad_value, "r3"),
                         "parse_record(r3): unparseable fhr value 'abc' at row 2",
                         data_error);

    std::istringstream bad_header("bpm\n140\n");
    CHECK_THROWS_AS(parse_record(bad_header, "r4"), data_error);

    std::istringstream bad_columns("fhr\n140,9\n");
    CHECK_THROWS_AS(parse_record(bad_columns, "r5"), data_error);

    std::istringstream empty("");
    CHECK_THROWS_AS(parse_record(empty, "r6"), data_error);
}

TEST_CASE("parse_record missing tokens become the 0.0 marker") {
    std::istringstream in("fhr\n140\n\nnan\nNA\n139\n");
    const Record rec = parse_record(in, "r7");
    CHECK(rec.fhr == std::vector<double>{140, 0, 0, 0, 139});
}

TEST_CASE("record csv round-trip") {
    Record rec = testing::make_record("rt", {140.25, 0.0, 139.875, 150.123456789}, Label::control);
    rec.uc.emplace(std::vector<double>{1.5, 2.25, 3.0, 0.0});
    std::ostringstream out;
    write_record_csv(out, rec);
    std::istringstream in(out.str());
    const Record back = parse_record(in, "rt");
    CHECK(back.fhr == rec.fhr);
    REQUIRE(back.uc.has_value());
    CHECK(*back.uc == *rec.uc);
}

TEST_CASE("label_record rules") {
    auto [l1, a1] = label_record({7.10, Delivery::caesarean, Annotation::normal});
    CHECK(l1 == Label::case_);
    CHECK(a1 == Annotation::acidosis);

    auto [l2, a2] = label_record({7.30, Delivery::caesarean, Annotation::normal});
    CHECK(l2 == Label::case_);
    CHECK(a2 == Annotation::no_pathology_evidence);

    auto [l3, a3] = label_record({7.22, Delivery::caesarean, Annotation::normal});
    CHECK(l3 == Label::case_);
    CHECK(a3 == Annotation::deterioration);

    auto [l4, a4] = label_record({7.30, Delivery::vaginal, Annotation::normal});
    CHECK(l4 == Label::control);
    CHECK(a4 == Annotation::normal);

    // boundary: 7.20 is still acidosis
    auto [l5, a5] = label_record({7.20, Delivery::caesarean, Annotation::normal});
    CHECK(l5 == Label::case_);
    CHECK(a5 == Annotation::acidosis);

    CHECK_THROWS_AS(label_record({6.2, Delivery::vaginal, Annotation::normal}), data_error);
    CHECK_THROWS_AS(label_record({7.9, Delivery::caesarean, Annotation::normal}), data_error);
}

TEST_CASE("labeling is pure") {
    for (int i = 0; i < 5; ++i) {
        auto [l, a] = label_record({7.18, Delivery::caesarean, Annotation::normal});
        CHECK(l == Label::case_);
        CHECK(a == Annotation::acidosis);
    }
}

TEST_CASE("load_dataset counts and label partition") {
    testing::TempDir dir("dataio");
    const auto manifest_path = testing::write_synthetic_dataset(dir, 3, 50, 11);
    const DatasetManifest manifest = load_manifest_file(manifest_path);
    const Dataset ds = load_dataset(manifest, dir.path());
    CHECK(ds.summary.total == 6);
    CHECK(ds.summary.cases == 3);
    CHECK(ds.summary.controls == 3);
    CHECK(ds.summary.cases + ds.summary.controls == ds.summary.total);
    for (const auto& rec : ds.records) {
        CHECK(rec.length() == 50);
    }
}

TEST_CASE("load_dataset rejects duplicate ids") {
    testing::TempDir dir("dupes");
    testing::write_file(dir.path() / "a.csv", "fhr\n140\n141\n");
    testing::write_file(dir.path() / "m.csv",
                        "id,path,delivery,ph\nx,a.csv,vaginal,7.3\nx,a.csv,vaginal,7.3\n");
    const DatasetManifest manifest = load_manifest_file(dir.path() / "m.csv");
    CHECK_THROWS_AS(load_dataset(manifest, dir.path()), data_error);
}

TEST_CASE("load_dataset aborts naming a missing record") {
    testing::TempDir dir("missing");
    testing::write_file(dir.path() / "m.csv", "id,path,delivery,ph\ngone,gone.csv,vaginal,7.3\n");
    const DatasetManifest manifest = load_manifest_file(dir.path() / "m.csv");
    try {
        load_dataset(manifest, dir.path());
        FAIL("expected data_error");
    } catch (const data_error& e) {
        CHECK(std::string(e.what()).find("gone") != std::string::npos);
    }
}

TEST_CASE("empty manifest gives empty dataset") {
    std::istringstream in("id,path,delivery,ph\n");
    const DatasetManifest manifest = parse_manifest(in);
    const Dataset ds = load_dataset(manifest, ".");
    CHECK(ds.records.empty());
    CHECK(ds.summary.total == 0);
    CHECK(ds.summary.cases == 0);
    CHECK(ds.summary.controls == 0);
}
