#include "subframe/frame_io.hpp"

#include <fstream>

namespace subframe::io {

using nlohmann::json;

json params_to_json(const FrameParams& p) {
  json j = json::object();
  if (p.m) j["m"] = *p.m;
  if (p.n) j["n"] = *p.n;
  if (p.q) j["q"] = *p.q;
  if (p.v) j["v"] = *p.v;
  if (p.copies) j["copies"] = *p.copies;
  if (!p.set.empty()) j["set"] = p.set;
  if (!p.mode.empty()) j["mode"] = p.mode;
  if (!p.bases.empty()) j["bases"] = p.bases;
  if (p.real) j["real"] = true;
  if (p.seed) j["seed"] = *p.seed;
  if (p.stream) j["stream"] = *p.stream;
  return j;
}

FrameParams params_from_json(const json& j) {
  FrameParams p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw Error("frame params must be a JSON object");
  auto opt_int = [&](const char* key, std::optional<int>& out) {
    if (j.contains(key)) out = j.at(key).get<int>();
  };
  opt_int("m", p.m);
  opt_int("n", p.n);
  opt_int("q", p.q);
  opt_int("v", p.v);
  opt_int("copies", p.copies);
  if (j.contains("set")) p.set = j.at("set").get<std::vector<int>>();
  if (j.contains("mode")) p.mode = j.at("mode").get<std::string>();
  if (j.contains("bases")) p.bases = j.at("bases").get<std::vector<std::string>>();
  if (j.contains("real")) p.real = j.at("real").get<bool>();
  if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("stream")) p.stream = j.at("stream").get<std::uint64_t>();
  return p;
}

json frame_to_json(const Frame& frame) {
  const ComplexMatrix& f = frame.matrix();
  json re = json::array();
  json im = json::array();
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    json row_re = json::array();
    json row_im = json::array();
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
      row_re.push_back(f(r, c).real());
      row_im.push_back(f(r, c).imag());
    }
    re.push_back(std::move(row_re));
    im.push_back(std::move(row_im));
  }
  return json{{"m", frame.m()},
              {"n", frame.n()},
              {"family", std::string(to_string(frame.family()))},
              {"params", params_to_json(frame.params())},
              {"re", std::move(re)},
              {"im", std::move(im)}};
}

Frame frame_from_json(const json& j, double unit_norm_tol) {
  try {
    const int m = j.at("m").get<int>();
    const int n = j.at("n").get<int>();
    if (m < 1 || n < 1) throw Error("frame JSON: m and n must be positive");
    const json& re = j.at("re");
    const json* im = j.contains("im") ? &j.at("im") : nullptr;
    if (!re.is_array() || static_cast<int>(re.size()) != m) {
      throw Error("frame JSON: 're' must have m rows");
    }
    if (im && (!im->is_array() || static_cast<int>(im->size()) != m)) {
      throw Error("frame JSON: 'im' must have m rows");
    }
    ComplexMatrix f(m, n);
    for (int r = 0; r < m; ++r) {
      const json& row_re = re.at(static_cast<std::size_t>(r));
      if (static_cast<int>(row_re.size()) != n) throw Error("frame JSON: row length differs from n");
      for (int c = 0; c < n; ++c) {
        const double a = row_re.at(static_cast<std::size_t>(c)).get<double>();
        double b = 0.0;
        if (im) {
          const json& row_im = im->at(static_cast<std::size_t>(r));
          if (static_cast<int>(row_im.size()) != n) {
            throw Error("frame JSON: row length differs from n");
          }
          b = row_im.at(static_cast<std::size_t>(c)).get<double>();
        }
        f(r, c) = Complex(a, b);
      }
    }
    const FrameFamily family =
        j.contains("family") ? parse_family(j.at("family").get<std::string>()) : FrameFamily::custom;
    const FrameParams params = params_from_json(j.value("params", json::object()));
    return Frame(std::move(f), family, params, unit_norm_tol);
  } catch (const json::exception& e) {
    throw Error(std::string("frame JSON: ") + e.what());
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_frame(const Frame& frame, const std::filesystem::path& path) {
  write_json(frame_to_json(frame), path);
}

Frame read_frame(const std::filesystem::path& path, double unit_norm_tol) {
  return frame_from_json(read_json(path), unit_norm_tol);
}

}  // namespace subframe::io
