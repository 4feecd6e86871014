// Scripted external classifier for transport tests. Speaks the JSON-lines
// protocol on stdin/stdout; label 1 iff mean intensity > 0.5.
//
//   --die-after N   exit after answering N requests
//   --fault KIND    answer request --fault-at (default 1) with a defect:
//                   wrong-id, short, garbage, error, bad-label, nan, hang
//   --fault-at K    1-based request index for --fault

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include <json.hpp>

#include "rtk/image.hpp"
#include "rtk/protocol.hpp"

int main(int argc, char** argv) {
    long die_after = -1;
    long fault_at = 1;
    std::string fault;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--die-after") die_after = std::atol(argv[i + 1]);
        else if (flag == "--fault") fault = argv[i + 1];
        else if (flag == "--fault-at") fault_at = std::atol(argv[i + 1]);
    }

    long served = 0;
    for (std::string line; std::getline(std::cin, line);) {
        if (die_after >= 0 && served >= die_after) return 1;
        ++served;
        std::uint64_t id = 0;
        std::vector<rtk::Prediction> predictions;
        try {
            const auto request = rtk::decode_request(line);
            id = request.id;
            for (const auto& img : request.images) {
                const double m = rtk::mean_intensity(img);
                predictions.push_back(rtk::prediction_from_scores({1.0 - m, m}));
            }
        } catch (const std::exception& e) {
            std::cout << nlohmann::json{{"id", id}, {"error", e.what()}}.dump() << "\n" << std::flush;
            continue;
        }
        std::string response = rtk::encode_response(id, predictions);
        if (!fault.empty() && served == fault_at) {
            if (fault == "wrong-id") {
                response = rtk::encode_response(id + 100, predictions);
            } else if (fault == "short") {
                predictions.pop_back();
                response = rtk::encode_response(id, predictions);
            } else if (fault == "garbage") {
                response = "this is not json";
            } else if (fault == "error") {
                response = nlohmann::json{{"id", id}, {"error", "model exploded"}}.dump();
            } else if (fault == "bad-label") {
                auto doc = nlohmann::json::parse(response);
                doc["predictions"][0]["label"] = 1 - doc["predictions"][0]["label"].get<int>();
                response = doc.dump();
            } else if (fault == "nan") {
                auto doc = nlohmann::json::parse(response);
                doc["predictions"][0]["scores"][0] = "NaN";
                response = doc.dump();
            } else if (fault == "hang") {
                std::this_thread::sleep_for(std::chrono::seconds(30));
            }
        }
        std::cout << response << "\n" << std::flush;
    }
    return 0;
}
