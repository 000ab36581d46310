// SPDX-License-Identifier: Apache-2.0

#include "focusagent/wire.hpp"

#include <json.hpp>

#include "focusagent/error.hpp"

namespace focusagent {

namespace {

using ordered_json = nlohmann::ordered_json;

std::int64_t millis(Timestamp t) { return t.time_since_epoch().count(); }
Timestamp from_millis(std::int64_t ms) { return Timestamp(std::chrono::milliseconds(ms)); }

nlohmann::json parse_object(std::string_view frame) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(frame);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::decode_error, std::string("malformed frame: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw Error(ErrorKind::decode_error, "frame must be an object with a string \"kind\"");
  }
  return j;
}

std::string string_field(const nlohmann::json& j, const char* name) {
  if (!j.contains(name) || !j[name].is_string()) {
    throw Error(ErrorKind::decode_error, std::string("frame needs string field \"") + name + "\"");
  }
  return j[name].get<std::string>();
}

std::string dump(const ordered_json& j) {
  try {
    return j.dump();
  } catch (const nlohmann::json::type_error& e) {
    throw Error(ErrorKind::encode_error, e.what());
  }
}

}  // namespace

std::string_view to_string(ClientEventKind kind) {
  switch (kind) {
    case ClientEventKind::join: return "join";
    case ClientEventKind::utterance: return "utterance";
    case ClientEventKind::leave: return "leave";
    case ClientEventKind::ping: return "ping";
  }
  return "ping";
}

std::string_view to_string(ServerEventKind kind) {
  switch (kind) {
    case ServerEventKind::moderator_message: return "moderator_message";
    case ServerEventKind::stage_changed: return "stage_changed";
    case ServerEventKind::participant_echo: return "participant_echo";
    case ServerEventKind::session_closed: return "session_closed";
    case ServerEventKind::roster: return "roster";
  }
  return "roster";
}

ClientEvent ClientEvent::join(std::string client, std::string name, Timestamp at) {
  return {ClientEventKind::join, std::move(client), at, std::move(name), {}};
}
ClientEvent ClientEvent::utterance(std::string client, std::string text, Timestamp at) {
  return {ClientEventKind::utterance, std::move(client), at, {}, std::move(text)};
}
ClientEvent ClientEvent::leave(std::string client, Timestamp at) {
  return {ClientEventKind::leave, std::move(client), at, {}, {}};
}
ClientEvent ClientEvent::ping(std::string client, Timestamp at) {
  return {ClientEventKind::ping, std::move(client), at, {}, {}};
}

ServerEvent ServerEvent::moderator_message(std::string text, Timestamp at) {
  ServerEvent e;
  e.kind = ServerEventKind::moderator_message;
  e.at = at;
  e.text = std::move(text);
  return e;
}
ServerEvent ServerEvent::stage_changed(int index, std::string title, Timestamp at) {
  ServerEvent e;
  e.kind = ServerEventKind::stage_changed;
  e.at = at;
  e.index = index;
  e.title = std::move(title);
  return e;
}
ServerEvent ServerEvent::participant_echo(std::string name, std::string text, Timestamp at) {
  ServerEvent e;
  e.kind = ServerEventKind::participant_echo;
  e.at = at;
  e.name = std::move(name);
  e.text = std::move(text);
  return e;
}
ServerEvent ServerEvent::session_closed(Timestamp at) {
  ServerEvent e;
  e.kind = ServerEventKind::session_closed;
  e.at = at;
  return e;
}
ServerEvent ServerEvent::roster(std::vector<std::string> names, Timestamp at) {
  ServerEvent e;
  e.kind = ServerEventKind::roster;
  e.at = at;
  e.names = std::move(names);
  return e;
}

ClientEvent decode_client_event(std::string_view frame, std::string client, Timestamp received_at) {
  const auto j = parse_object(frame);
  const auto kind = j["kind"].get<std::string>();
  ClientEvent e;
  e.client = std::move(client);
  e.at = received_at;
  if (j.contains("at")) {
    if (!j["at"].is_number_integer()) throw Error(ErrorKind::decode_error, "\"at\" must be an integer");
    e.at = from_millis(j["at"].get<std::int64_t>());
  }
  if (kind == "join") {
    e.kind = ClientEventKind::join;
    e.display_name = string_field(j, "display_name");
  } else if (kind == "utterance") {
    e.kind = ClientEventKind::utterance;
    e.text = string_field(j, "text");
  } else if (kind == "leave") {
    e.kind = ClientEventKind::leave;
  } else if (kind == "ping") {
    e.kind = ClientEventKind::ping;
  } else {
    throw Error(ErrorKind::decode_error, "unknown client event kind " + kind);
  }
  return e;
}

std::string encode_client_event(const ClientEvent& event) {
  ordered_json j = {{"kind", to_string(event.kind)}};
  if (event.kind == ClientEventKind::join) j["display_name"] = event.display_name;
  if (event.kind == ClientEventKind::utterance) j["text"] = event.text;
  j["at"] = millis(event.at);
  return dump(j);
}

std::string encode_server_event(const ServerEvent& event) {
  ordered_json j = {{"kind", to_string(event.kind)}};
  switch (event.kind) {
    case ServerEventKind::moderator_message:
      j["text"] = event.text;
      j["subtitle"] = true;
      break;
    case ServerEventKind::stage_changed:
      j["index"] = event.index;
      j["title"] = event.title;
      break;
    case ServerEventKind::participant_echo:
      j["name"] = event.name;
      j["text"] = event.text;
      break;
    case ServerEventKind::session_closed:
      break;
    case ServerEventKind::roster:
      j["names"] = event.names;
      break;
  }
  j["at"] = millis(event.at);
  return dump(j);
}

ServerEvent decode_server_event(std::string_view frame) {
  const auto j = parse_object(frame);
  const auto kind = j["kind"].get<std::string>();
  ServerEvent e;
  if (!j.contains("at") || !j["at"].is_number_integer()) {
    throw Error(ErrorKind::decode_error, "server frame needs integer \"at\"");
  }
  e.at = from_millis(j["at"].get<std::int64_t>());
  try {
    if (kind == "moderator_message") {
      e.kind = ServerEventKind::moderator_message;
      e.text = string_field(j, "text");
      e.subtitle = j.at("subtitle").get<bool>();
    } else if (kind == "stage_changed") {
      e.kind = ServerEventKind::stage_changed;
      e.index = j.at("index").get<int>();
      e.title = string_field(j, "title");
    } else if (kind == "participant_echo") {
      e.kind = ServerEventKind::participant_echo;
      e.name = string_field(j, "name");
      e.text = string_field(j, "text");
    } else if (kind == "session_closed") {
      e.kind = ServerEventKind::session_closed;
    } else if (kind == "roster") {
      e.kind = ServerEventKind::roster;
      e.names = j.at("names").get<std::vector<std::string>>();
    } else {
      throw Error(ErrorKind::decode_error, "unknown server event kind " + kind);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::decode_error, ex.what());
  }
  return e;
}

}  // namespace focusagent
