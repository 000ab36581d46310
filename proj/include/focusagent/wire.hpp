// SPDX-License-Identifier: Apache-2.0

// JSON text frames exchanged with live-session clients. Every frame is one
// object tagged by "kind"; field names are lowercase snake_case.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "focusagent/core_model.hpp"

namespace focusagent {

enum class ClientEventKind { join, utterance, leave, ping };

std::string_view to_string(ClientEventKind kind);

struct ClientEvent {
  ClientEventKind kind = ClientEventKind::ping;
  // Connection id, assigned by the server; never read from the frame.
  std::string client;
  Timestamp at{};
  std::string display_name;  // join
  std::string text;          // utterance

  bool operator==(const ClientEvent&) const = default;

  static ClientEvent join(std::string client, std::string name, Timestamp at = {});
  static ClientEvent utterance(std::string client, std::string text, Timestamp at = {});
  static ClientEvent leave(std::string client, Timestamp at = {});
  static ClientEvent ping(std::string client, Timestamp at = {});
};

enum class ServerEventKind { moderator_message, stage_changed, participant_echo, session_closed, roster };

std::string_view to_string(ServerEventKind kind);

struct ServerEvent {
  ServerEventKind kind = ServerEventKind::roster;
  Timestamp at{};
  std::string text;                // moderator_message, participant_echo
  bool subtitle = true;            // moderator_message
  int index = 0;                   // stage_changed
  std::string title;               // stage_changed
  std::string name;                // participant_echo
  std::vector<std::string> names;  // roster

  bool operator==(const ServerEvent&) const = default;

  static ServerEvent moderator_message(std::string text, Timestamp at);
  static ServerEvent stage_changed(int index, std::string title, Timestamp at);
  static ServerEvent participant_echo(std::string name, std::string text, Timestamp at);
  static ServerEvent session_closed(Timestamp at);
  static ServerEvent roster(std::vector<std::string> names, Timestamp at);
};

// Client frames: {"kind":"join","display_name":...}, {"kind":"utterance","text":...},
// {"kind":"leave"}, {"kind":"ping"}; an optional integer "at" (ms since epoch)
// is accepted and otherwise replaced by `received_at`. DecodeError on
// malformed frames.
ClientEvent decode_client_event(std::string_view frame, std::string client, Timestamp received_at);
std::string encode_client_event(const ClientEvent& event);

std::string encode_server_event(const ServerEvent& event);
ServerEvent decode_server_event(std::string_view frame);

}  // namespace focusagent
