#include "falsify/error.hpp"
#include "falsify/models.hpp"

#include <fmt/format.h>

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace falsify {

namespace {

std::vector<std::string> tokens(const std::string &line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) {
    out.push_back(t);
  }
  return out;
}

double to_number(const std::string &text, const char *what) {
  char *end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw ProtocolError(fmt::format("bad {} '{}'", what, text));
  }
  return v;
}

bool next_line(std::istream &in, std::string &line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.find_first_not_of(" \t") != std::string::npos) {
      return true;
    }
  }
  return false;
}

std::string tail_of_file(const std::string &path, std::size_t max_bytes = 2000) {
  std::FILE *f = std::fopen(path.c_str(), "rb");
  if (f == nullptr) {
    return {};
  }
  std::string data;
  char buffer[4096];
  std::size_t n = 0;
  while ((n = std::fread(buffer, 1, sizeof buffer, f)) > 0) {
    data.append(buffer, n);
  }
  std::fclose(f);
  if (data.size() > max_bytes) {
    data.erase(0, data.size() - max_bytes);
  }
  return data;
}

} // namespace

void write_request(std::ostream &out, const InputSignal &u, double step) {
  out << fmt::format("SIMULATE {:.17g} {:.17g}\n", step, u.length());
  for (const auto &segment : u.segments()) {
    out << fmt::format("SEG {:.17g}", segment.duration);
    for (double v : segment.values) {
      out << fmt::format(" {:.17g}", v);
    }
    out << '\n';
  }
  out << "END\n";
}

std::optional<SimulationRequest> read_request(std::istream &in) {
  std::string line;
  if (!next_line(in, line)) {
    return std::nullopt;
  }
  auto head = tokens(line);
  if (head.size() != 3 || head[0] != "SIMULATE") {
    throw ProtocolError(fmt::format("expected 'SIMULATE step horizon', got '{}'", line));
  }
  SimulationRequest request;
  request.step = to_number(head[1], "step");
  request.horizon = to_number(head[2], "horizon");
  std::vector<Segment> segments;
  for (;;) {
    if (!next_line(in, line)) {
      throw ProtocolError("request ended before END");
    }
    auto t = tokens(line);
    if (t.size() == 1 && t[0] == "END") {
      break;
    }
    if (t.size() < 3 || t[0] != "SEG") {
      throw ProtocolError(fmt::format("expected 'SEG duration values...', got '{}'", line));
    }
    Segment s;
    s.duration = to_number(t[1], "duration");
    for (std::size_t i = 2; i < t.size(); ++i) {
      s.values.push_back(to_number(t[i], "value"));
    }
    if (!segments.empty() && s.values.size() != segments.front().values.size()) {
      throw ProtocolError("segments disagree on input dimension");
    }
    segments.push_back(std::move(s));
  }
  if (segments.empty()) {
    throw ProtocolError("request has no segments");
  }
  const std::size_t n = segments.front().values.size();
  request.input = InputSignal(n, std::move(segments));
  return request;
}

void write_response(std::ostream &out, const Trace &y) {
  out << fmt::format("TRACE {} {}\n", y.dimension(), y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    out << fmt::format("{:.17g}", static_cast<double>(i) * y.step());
    for (double v : y.row(i)) {
      out << fmt::format(",{:.17g}", v);
    }
    out << '\n';
  }
  out << "END\n";
}

Trace read_response(std::istream &in, std::size_t outputs, double step) {
  std::string line;
  if (!next_line(in, line)) {
    throw ProtocolError("simulator produced no response");
  }
  auto head = tokens(line);
  if (head.size() != 3 || head[0] != "TRACE") {
    throw ProtocolError(fmt::format("expected 'TRACE m rows', got '{}'", line));
  }
  const double m = to_number(head[1], "column count");
  const double rows = to_number(head[2], "row count");
  if (m != static_cast<double>(outputs)) {
    throw ProtocolError(fmt::format("simulator reports {} outputs, model declares {}", head[1], outputs));
  }
  if (rows < 1 || rows != std::floor(rows)) {
    throw ProtocolError(fmt::format("bad row count '{}'", head[2]));
  }
  Trace y(outputs, step);
  std::vector<double> row(outputs);
  for (std::size_t i = 0; i < static_cast<std::size_t>(rows); ++i) {
    if (!next_line(in, line)) {
      throw ProtocolError(fmt::format("response ended after {} of {} rows", i, head[2]));
    }
    std::vector<std::string> fields;
    std::string field;
    std::istringstream fs(line);
    while (std::getline(fs, field, ',')) {
      fields.push_back(field);
    }
    if (fields.size() != outputs + 1) {
      throw ProtocolError(fmt::format("row {} has {} columns, expected {}", i, fields.size(), outputs + 1));
    }
    const double t = to_number(fields[0], "time");
    if (std::abs(t - static_cast<double>(i) * step) > 1e-6 * step) {
      throw ProtocolError(fmt::format("row {} has time {}, expected {}", i, t, static_cast<double>(i) * step));
    }
    for (std::size_t j = 0; j < outputs; ++j) {
      row[j] = to_number(fields[j + 1], "value");
    }
    y.push_back(row);
  }
  if (!next_line(in, line) || tokens(line) != std::vector<std::string>{"END"}) {
    throw ProtocolError("response not terminated by END");
  }
  return y;
}

class ExternalModel::Process {
public:
  explicit Process(const std::vector<std::string> &command) {
    if (command.empty()) {
      throw SimulationError("external simulator command is empty");
    }
    std::signal(SIGPIPE, SIG_IGN);
    char path[] = "/tmp/falsify-sim-stderr-XXXXXX";
    const int err_fd = ::mkostemp(path, O_CLOEXEC);
    if (err_fd < 0) {
      throw SimulationError(fmt::format("cannot create stderr capture file: {}", std::strerror(errno)));
    }
    stderr_path_ = path;
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0 || ::pipe2(from_child, O_CLOEXEC) != 0) {
      ::close(err_fd);
      throw SimulationError(fmt::format("pipe: {}", std::strerror(errno)));
    }
    std::vector<char *> argv;
    for (const auto &arg : command) {
      argv.push_back(const_cast<char *>(arg.c_str()));
    }
    argv.push_back(nullptr);
    pid_ = ::fork();
    if (pid_ < 0) {
      throw SimulationError(fmt::format("fork: {}", std::strerror(errno)));
    }
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::dup2(err_fd, STDERR_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::close(err_fd);
      ::execvp(argv[0], argv.data());
      const char message[] = "exec failed\n";
      [[maybe_unused]] auto ignored = ::write(STDERR_FILENO, message, sizeof message - 1);
      std::_Exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    ::close(err_fd);
    write_fd_ = to_child[1];
    read_ = ::fdopen(from_child[0], "r");
  }

  ~Process() {
    if (write_fd_ >= 0) {
      ::close(write_fd_);
    }
    if (read_ != nullptr) {
      std::fclose(read_);
    }
    if (pid_ > 0) {
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) == 0) {
        ::kill(pid_, SIGTERM);
        ::waitpid(pid_, &status, 0);
      }
    }
    ::unlink(stderr_path_.c_str());
  }

  Process(const Process &) = delete;
  Process &operator=(const Process &) = delete;

  void send(const std::string &text) {
    std::size_t written = 0;
    while (written < text.size()) {
      const ssize_t n = ::write(write_fd_, text.data() + written, text.size() - written);
      if (n < 0) {
        if (errno == EINTR) {
          continue;
        }
        throw ProtocolError(fmt::format("writing to simulator failed: {}{}", std::strerror(errno), diagnostics()));
      }
      written += static_cast<std::size_t>(n);
    }
  }

  /// Reads lines up to and including the END that closes a response.
  std::string receive() {
    std::string text;
    char *buffer = nullptr;
    std::size_t capacity = 0;
    bool seen_header = false;
    for (;;) {
      const ssize_t n = ::getline(&buffer, &capacity, read_);
      if (n < 0) {
        std::free(buffer);
        throw ProtocolError(fmt::format("simulator closed its output mid-response{}", diagnostics()));
      }
      std::string line(buffer, static_cast<std::size_t>(n));
      text += line;
      const auto t = tokens(line);
      if (!t.empty() && t[0] == "TRACE") {
        seen_header = true;
      }
      if (seen_header && t == std::vector<std::string>{"END"}) {
        break;
      }
      if (!seen_header && !t.empty()) {
        break;
      }
    }
    std::free(buffer);
    return text;
  }

  std::string diagnostics() const {
    std::string out;
    int status = 0;
    if (pid_ > 0 && ::waitpid(pid_, &status, WNOHANG) == pid_) {
      if (WIFEXITED(status)) {
        out += fmt::format("; exit status {}", WEXITSTATUS(status));
      } else if (WIFSIGNALED(status)) {
        out += fmt::format("; killed by signal {}", WTERMSIG(status));
      }
      const_cast<Process *>(this)->pid_ = -1;
    }
    const std::string err = tail_of_file(stderr_path_);
    if (!err.empty()) {
      out += "; stderr: " + err;
    }
    return out;
  }

private:
  pid_t pid_ = -1;
  int write_fd_ = -1;
  std::FILE *read_ = nullptr;
  std::string stderr_path_;
};

ExternalModel::ExternalModel(std::vector<std::string> command, std::vector<std::string> inputs,
                             std::vector<std::string> outputs, std::vector<std::string> discrete)
    : command_(std::move(command)), inputs_(std::move(inputs)), outputs_(std::move(outputs)),
      discrete_(std::move(discrete)) {
  if (command_.empty()) {
    throw ValidationError("external model needs a command");
  }
  if (inputs_.empty() || outputs_.empty()) {
    throw ValidationError("external model needs at least one input and one output");
  }
}

ExternalModel::~ExternalModel() = default;

Trace ExternalModel::simulate(const InputSignal &u, double step) {
  if (u.dimension() != inputs_.size()) {
    throw SimulationError(fmt::format("external model expects {} inputs, got {}", inputs_.size(), u.dimension()));
  }
  if (!process_) {
    process_ = std::make_unique<Process>(command_);
  }
  try {
    std::ostringstream request;
    write_request(request, u, step);
    process_->send(request.str());
    std::istringstream response(process_->receive());
    Trace y = [&] {
      try {
        return read_response(response, outputs_.size(), step);
      } catch (const ProtocolError &e) {
        throw ProtocolError(e.what() + process_->diagnostics());
      }
    }();
    const std::size_t expected = sample_count(u.length(), step);
    if (y.size() != expected) {
      throw ProtocolError(fmt::format("simulator returned {} samples, expected {}", y.size(), expected));
    }
    return y;
  } catch (...) {
    process_.reset();
    throw;
  }
}

} // namespace falsify
