#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "twinpass/errors.hpp"
#include "twinpass/mcq.hpp"

using namespace twinpass;

namespace {

std::string write_temp(const std::string& content) {
    static int counter = 0;
    std::string path = "tp_dataset_test_" + std::to_string(counter++) + ".json";
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("load_dataset accepts a valid single-item array") {
    auto path = write_temp(R"([{"id":"q1","benchmark":"teleqna","question":"Q?",
        "options":["A","B","C"],"answer_index":1}])");
    Dataset ds = load_dataset(path, DatasetFormat::JsonArray);
    REQUIRE(ds.items.size() == 1);
    CHECK(ds.items[0].answer_index == 1);
    CHECK(ds.items[0].options.size() == 3);
    std::remove(path.c_str());
}

TEST_CASE("answer_index out of range is a validation error naming the field") {
    auto path = write_temp(R"([{"id":"q1","question":"Q?",
        "options":["A","B","C","D"],"answer_index":5}])");
    CHECK_THROWS_WITH_AS(load_dataset(path, DatasetFormat::JsonArray),
                         doctest::Contains("answer_index"), ValidationError);
    std::remove(path.c_str());
}

TEST_CASE("duplicate ids are rejected naming both positions") {
    auto path = write_temp(R"([
        {"id":"q1","question":"Q?","options":["A","B"],"answer_index":0},
        {"id":"q1","question":"Q2?","options":["A","B"],"answer_index":1}])");
    try {
        load_dataset(path, DatasetFormat::JsonArray);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        CHECK(msg.find("q1") != std::string::npos);
        CHECK(msg.find("0") != std::string::npos);
        CHECK(msg.find("1") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("jsonl format loads in file order") {
    auto path = write_temp(
        "{\"id\":\"a\",\"question\":\"Q\",\"options\":[\"x\",\"y\"],\"answer_index\":0}\n"
        "{\"id\":\"b\",\"question\":\"Q\",\"options\":[\"x\",\"y\"],\"answer_index\":1}\n");
    Dataset ds = load_dataset(path, DatasetFormat::JsonLines);
    REQUIRE(ds.items.size() == 2);
    CHECK(ds.items[0].id == "a");
    CHECK(ds.items[1].id == "b");
    std::remove(path.c_str());
}

TEST_CASE("field mapping adapts foreign key names") {
    auto path = write_temp(R"([{"qid":"q1","text":"Q?","choices":["A","B"],"key":1}])");
    FieldMapping m;
    m.id_key = "qid";
    m.question_key = "text";
    m.options_key = "choices";
    m.answer_key = "key";
    Dataset ds = load_dataset(path, DatasetFormat::JsonArray, m);
    REQUIRE(ds.items.size() == 1);
    CHECK(ds.items[0].answer_index == 1);
    std::remove(path.c_str());
}

TEST_CASE("one-based answer mapping converts to the internal zero base") {
    auto path = write_temp(R"([{"id":"q1","question":"Q?","options":["A","B","C"],
        "answer_index":3}])");
    FieldMapping m;
    m.answer_one_based = true;
    Dataset ds = load_dataset(path, DatasetFormat::JsonArray, m);
    CHECK(ds.items[0].answer_index == 2);
    std::remove(path.c_str());
}

TEST_CASE("render_options formats one 1-based line per option") {
    McqItem item;
    item.options = {"Alpha", "Beta"};
    CHECK(render_options(item) == "option 1: Alpha\noption 2: Beta");

    item.options = {"a", "b", "c", "d"};
    std::string r = render_options(item);
    CHECK(std::count(r.begin(), r.end(), '\n') == 3);
    CHECK(r.find("option 4: d") != std::string::npos);
}

TEST_CASE("canonical round-trip preserves the dataset") {
    auto path = write_temp(R"([
        {"id":"q1","benchmark":"b","question":"Q?","options":["A","B"],
         "answer_index":0,"category":"c"},
        {"id":"q2","question":"R?","options":["X","Y","Z"],"answer_index":2}])");
    Dataset ds = load_dataset(path, DatasetFormat::JsonArray);
    auto path2 = write_temp(dataset_to_json(ds).dump());
    Dataset ds2 = load_dataset(path2, DatasetFormat::JsonArray);
    CHECK(dataset_to_json(ds) == dataset_to_json(ds2));
    CHECK(dataset_content_hash(ds) == dataset_content_hash(ds2));
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("property: render_options line count equals option count") {
    std::mt19937 rng(42);
    std::uniform_int_distribution<int> n_opts(2, 10);
    for (int trial = 0; trial < 200; ++trial) {
        McqItem item;
        int n = n_opts(rng);
        for (int i = 0; i < n; ++i)
            item.options.push_back("opt" + std::to_string(rng() % 1000));
        std::string r = render_options(item);
        CHECK(std::count(r.begin(), r.end(), '\n') == n - 1);
    }
}

TEST_CASE("unreadable file is an IoError") {
    CHECK_THROWS_AS(load_dataset("/nonexistent/ds.json", DatasetFormat::JsonArray),
                    IoError);
}
