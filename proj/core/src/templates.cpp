#include "maskseq/templates.hpp"

#include <algorithm>
#include <array>
#include <random>

#include "maskseq/error.hpp"
#include "maskseq/random.hpp"

namespace maskseq {

namespace {

struct TaskName {
  Task task;
  std::string_view name;
};

constexpr std::array<TaskName, 13> kTaskNames = {{
    {Task::kCaption, "caption"},
    {Task::kVqa, "vqa"},
    {Task::kRec, "rec"},
    {Task::kRes, "res"},
    {Task::kGrec, "grec"},
    {Task::kGres, "gres"},
    {Task::kReg, "reg"},
    {Task::kNlvr, "nlvr"},
    {Task::kSpotCaption, "spot_caption"},
    {Task::kCoSeg, "coseg"},
    {Task::kAttCoSeg, "attcoseg"},
    {Task::kPqa, "pqa"},
    {Task::kBqa, "bqa"},
}};

constexpr std::array<Task, 13> kAllTasks = {
    Task::kCaption, Task::kVqa,         Task::kRec,   Task::kRes,      Task::kGrec,
    Task::kGres,    Task::kReg,         Task::kNlvr,  Task::kSpotCaption, Task::kCoSeg,
    Task::kAttCoSeg, Task::kPqa,        Task::kBqa,
};

const std::array<std::string_view, 6> kKnownPlaceholders = {"image", "expr",  "question",
                                                            "objs",  "bsep", "msep"};

bool is_marker(std::string_view name) {
  return name == "image" || name == "bsep" || name == "msep";
}

bool is_name_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Finds the next "<name>" at or after `from`; returns npos when none.
std::size_t next_placeholder(std::string_view text, std::size_t from, std::string_view& name) {
  for (std::size_t open = text.find('<', from); open != std::string_view::npos;
       open = text.find('<', open + 1)) {
    std::size_t end = open + 1;
    while (end < text.size() && is_name_char(text[end])) ++end;
    if (end > open + 1 && end < text.size() && text[end] == '>') {
      name = text.substr(open + 1, end - open - 1);
      return open;
    }
  }
  return std::string_view::npos;
}

PlaceholderRule rule(std::vector<std::string> required, std::vector<std::string> optional,
                     std::size_t image_markers = 1) {
  PlaceholderRule r;
  r.required = required;
  r.allowed = std::move(required);
  r.allowed.emplace_back("image");
  for (auto& o : optional) r.allowed.push_back(std::move(o));
  r.image_markers = image_markers;
  return r;
}

const std::map<Task, PlaceholderRule>& rules() {
  static const std::map<Task, PlaceholderRule> table = {
      {Task::kCaption, rule({}, {})},
      {Task::kVqa, rule({"question"}, {})},
      {Task::kRec, rule({"expr"}, {})},
      {Task::kRes, rule({"expr"}, {})},
      {Task::kGrec, rule({"expr"}, {"bsep"})},
      {Task::kGres, rule({"expr"}, {"msep"})},
      {Task::kReg, rule({"objs"}, {})},
      {Task::kNlvr, rule({"question"}, {}, 2)},
      {Task::kSpotCaption, rule({}, {})},
      {Task::kCoSeg, rule({}, {"msep"})},
      {Task::kAttCoSeg, rule({}, {"msep"})},
      {Task::kPqa, rule({"question", "objs"}, {})},
      {Task::kBqa, rule({"question", "objs"}, {})},
  };
  return table;
}

TemplateRegistry make_builtin() {
  TemplateRegistry reg;
  const auto add = [&](Task task, std::initializer_list<const char*> texts) {
    for (const char* t : texts) reg.register_template(task, t);
  };
  add(Task::kCaption, {
      "Describe the picture <image> in one or two sentences.",
      "Write a short caption for <image>.",
      "Summarize what can be seen in <image>.",
  });
  add(Task::kVqa, {
      "Look at <image> and answer briefly: <question>",
      "Based on <image>, give a short answer to this question: <question>",
      "<image> Answer in a few words: <question>",
  });
  add(Task::kRec, {
      "Give the bounding box of <expr> in <image>. Exactly one object matches. Answer as "
      "[x0, y0, x1, y1] with the top-left and bottom-right corners.",
      "In <image>, where is <expr>? There is a single match. Reply with its box as "
      "[x0, y0, x1, y1], top-left corner first.",
      "Box the one object in <image> that fits the phrase <expr>, formatted as [x0, y0, x1, y1].",
  });
  add(Task::kRes, {
      "Segment <expr> in <image>. Exactly one object matches. Answer with points along its "
      "outline as [x0, y0, x1, y1, ...].",
      "Trace the outline of <expr> in <image> (a single object) and list the outline points as "
      "[x0, y0, x1, y1, ...].",
      "Which region of <image> is <expr>? Reply with its contour as [x0, y0, x1, y1, ...].",
  });
  add(Task::kGrec, {
      "Box every object in <image> that matches <expr>. Reply with an empty string if nothing "
      "matches; otherwise give each box as [x0, y0, x1, y1] and put <bsep> between boxes.",
      "List the boxes of all objects described by <expr> in <image>, each as [x0, y0, x1, y1] "
      "and separated by <bsep>. If there are none, answer with nothing.",
  });
  add(Task::kGres, {
      "Segment every object in <image> that matches <expr>. Reply with an empty string if "
      "nothing matches; otherwise give each outline as [x0, y0, x1, y1, ...] and put <msep> "
      "between objects.",
      "Outline all objects described by <expr> in <image>, each as [x0, y0, x1, y1, ...] and "
      "separated by <msep>. If there are none, answer with nothing.",
  });
  add(Task::kReg, {
      "Write an expression that singles out the region <objs> in <image>.",
      "How would you describe the region <objs> of <image> so that nobody confuses it with "
      "anything else?",
      "Refer to the object at <objs> in <image> with a short, unambiguous phrase.",
  });
  add(Task::kNlvr, {
      "Left: <image> Right: <image> Is the statement true or false? <question>",
      "Consider the first image <image> and the second image <image>. Answer True or False: "
      "<question>",
  });
  add(Task::kSpotCaption, {
      "Describe <image> in detail and give each object you mention a box [x0, y0, x1, y1].",
      "Write a full description of <image>, adding the box [x0, y0, x1, y1] after every object "
      "named.",
  });
  add(Task::kCoSeg, {
      "The images <image> share one kind of object. Segment it in each image as "
      "[x0, y0, x1, y1, ...] and put <msep> between the masks.",
      "Find the object common to all of <image> and outline it in every image as "
      "[x0, y0, x1, y1, ...], separated by <msep>.",
  });
  add(Task::kAttCoSeg, {
      "Among the images <image>, exactly two contain an object with matching shape, colour, "
      "size and position. Name the two images and outline that object in both as "
      "[x0, y0, x1, y1, ...], separated by <msep>.",
      "Which two of <image> show an object with the same attributes? Give their indices, then "
      "its outline in each as [x0, y0, x1, y1, ...] with <msep> between the two.",
  });
  add(Task::kPqa, {
      "In <image>, look at the point <objs>. <question>",
      "Focus on the location <objs> in <image> and answer: <question>",
  });
  add(Task::kBqa, {
      "In <image>, look at the region <objs>. <question>",
      "Consider the box <objs> in <image> and answer: <question>",
  });
  return reg;
}

}  // namespace

std::string_view to_string(Task task) {
  for (const auto& tn : kTaskNames) {
    if (tn.task == task) return tn.name;
  }
  return "unknown";
}

Task parse_task(std::string_view name) {
  for (const auto& tn : kTaskNames) {
    if (tn.name == name) return tn.task;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown task '" + std::string(name) + "'");
}

std::span<const Task> all_tasks() { return kAllTasks; }

bool is_grounding_task(Task task) {
  switch (task) {
    case Task::kRec:
    case Task::kRes:
    case Task::kGrec:
    case Task::kGres:
    case Task::kCoSeg:
    case Task::kAttCoSeg:
      return true;
    default:
      return false;
  }
}

ExpectKind grounding_kind(Task task) {
  return task == Task::kRec || task == Task::kGrec ? ExpectKind::kBoxes : ExpectKind::kMasks;
}

bool is_multi_image_task(Task task) { return task == Task::kCoSeg || task == Task::kAttCoSeg; }

const PlaceholderRule& placeholder_rule(Task task) { return rules().at(task); }

std::vector<std::string> placeholders_in(std::string_view text) {
  std::vector<std::string> out;
  std::string_view name;
  for (std::size_t pos = next_placeholder(text, 0, name); pos != std::string_view::npos;
       pos = next_placeholder(text, pos + name.size() + 2, name)) {
    out.emplace_back(name);
  }
  return out;
}

std::size_t count_image_markers(std::string_view text) {
  const auto names = placeholders_in(text);
  return static_cast<std::size_t>(std::count(names.begin(), names.end(), "image"));
}

const TemplateRegistry& TemplateRegistry::builtin() {
  static const TemplateRegistry reg = make_builtin();
  return reg;
}

void TemplateRegistry::register_template(Task task, std::string text) {
  const PlaceholderRule& r = placeholder_rule(task);
  const auto names = placeholders_in(text);
  const std::string where = " in " + std::string(to_string(task)) + " template";
  for (const auto& n : names) {
    if (std::find(kKnownPlaceholders.begin(), kKnownPlaceholders.end(), n) ==
        kKnownPlaceholders.end()) {
      throw Error(ErrorCode::kInvalidArgument, "unknown placeholder <" + n + ">" + where);
    }
    if (std::find(r.allowed.begin(), r.allowed.end(), n) == r.allowed.end()) {
      throw Error(ErrorCode::kInvalidArgument, "placeholder <" + n + "> not allowed" + where);
    }
  }
  for (const auto& req : r.required) {
    if (std::find(names.begin(), names.end(), req) == names.end()) {
      throw Error(ErrorCode::kInvalidArgument, "missing placeholder <" + req + ">" + where);
    }
  }
  const auto markers = static_cast<std::size_t>(std::count(names.begin(), names.end(), "image"));
  if (markers != r.image_markers) {
    throw Error(ErrorCode::kInvalidArgument, "expected " + std::to_string(r.image_markers) +
                                                 " <image> marker(s), found " +
                                                 std::to_string(markers) + where);
  }
  templates_[task].push_back(std::move(text));
}

void TemplateRegistry::register_templates(Task task, std::span<const std::string> texts) {
  for (const auto& t : texts) register_template(task, t);
}

const std::vector<std::string>& TemplateRegistry::templates(Task task) const {
  const auto it = templates_.find(task);
  if (it == templates_.end() || it->second.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "no templates registered for " + std::string(to_string(task)));
  }
  return it->second;
}

std::size_t TemplateRegistry::pick(Task task, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  return static_cast<std::size_t>(uniform_index(rng, templates(task).size()));
}

std::string TemplateRegistry::render(Task task, const Bindings& bindings, std::uint64_t seed,
                                     std::size_t image_count) const {
  const std::string& text = templates(task)[pick(task, seed)];
  if (is_multi_image_task(task)) {
    if (image_count == 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(to_string(task)) + " needs the number of input images");
    }
    return render_text(text, bindings, image_count);
  }
  const std::size_t markers = placeholder_rule(task).image_markers;
  if (image_count != 0 && image_count != markers) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(to_string(task)) + " takes " + std::to_string(markers) +
                    " image(s), got " + std::to_string(image_count));
  }
  return render_text(text, bindings);
}

std::string render_text(std::string_view text, const Bindings& bindings,
                        std::size_t image_expansion) {
  std::string out;
  out.reserve(text.size() + 64);
  std::size_t copied = 0;
  std::string_view name;
  for (std::size_t pos = next_placeholder(text, 0, name); pos != std::string_view::npos;
       pos = next_placeholder(text, copied, name)) {
    out.append(text.substr(copied, pos - copied));
    copied = pos + name.size() + 2;
    if (name == "image") {
      for (std::size_t i = 0; i < image_expansion; ++i) {
        if (i > 0) out += ' ';
        out += kImageMarker;
      }
    } else if (is_marker(name)) {
      out.append(text.substr(pos, copied - pos));
    } else {
      const auto it = bindings.find(name);
      if (it == bindings.end()) {
        throw Error(ErrorCode::kInvalidArgument, "missing binding for <" + std::string(name) + ">");
      }
      out += it->second;
    }
  }
  out.append(text.substr(copied));
  return out;
}

}  // namespace maskseq
