"""Conversation container and the three chat templates.

A template renders a conversation into typed segments rather than one flat
string, so downstream assembly knows which tokens belong to assistant
responses and which end-of-turn markers close them.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

from ..exceptions import EmptyConversation, MissingSignalPlaceholder, ValidationError

SIGNAL_PLACEHOLDER = "<signal>"

DEFAULT_SYSTEM_PROMPT = (
    "You are an expert multimodal assistant capable of processing both natural language "
    "text and ECG signals. When you receive input, first determine if it is text, ECG data, "
    "or both. For ECG signals, interpret them as time-series data representing cardiac "
    "activity—analyzing features such as heart rate, rhythm, and potential abnormalities. "
    "When both modalities are present, synthesize the information to provide integrated, "
    "expert cardiac electrophysiologist-level responses. Your answers should be precise, "
    "concise, and informed by clinical signal analysis and natural language understanding. "
    "Additionally, if the user asks a general question, you should answer it as a general "
    "assistant."
)


class Kind(IntEnum):
    PAD = 0
    TEXT = 1
    SIGNAL = 2
    RESPONSE = 3
    EOT = 4          # end-of-turn closing a system/user block
    RESPONSE_EOT = 5  # end-of-turn closing an assistant response


TARGET_KINDS = frozenset({Kind.RESPONSE, Kind.RESPONSE_EOT})


@dataclass(frozen=True)
class Turn:
    query: str
    response: str


@dataclass(frozen=True)
class Conversation:
    turns: tuple[Turn, ...]
    system_prompt: str | None = None
    id: str = ""
    signal_ref: str | None = None

    def __post_init__(self):
        turns = tuple(t if isinstance(t, Turn) else Turn(*t) for t in self.turns)
        if not turns:
            raise EmptyConversation("a conversation needs at least one turn")
        object.__setattr__(self, "turns", turns)

    @classmethod
    def from_dict(cls, data: dict) -> "Conversation":
        try:
            turns = tuple(Turn(str(t["q"]), str(t["s"])) for t in data.get("turns", ()))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad turn record: {exc}") from exc
        return cls(
            turns=turns,
            system_prompt=data.get("system"),
            id=str(data.get("id", "")),
            signal_ref=data.get("signal_ref"),
        )


@dataclass(frozen=True)
class ChatTemplate:
    name: str
    bos: str
    system_open: str
    user_open: str
    assistant_open: str
    eot: str
    after_eot: str
    has_system: bool

    @property
    def control_tokens(self) -> list[str]:
        parts = {self.bos, self.eot}
        for s in (self.system_open, self.user_open, self.assistant_open):
            parts.update(p for p in _split_controls(s))
        return sorted(p for p in parts if p)


def _split_controls(text: str) -> list[str]:
    out, i = [], 0
    while i < len(text):
        if text[i] == "<":
            j = text.find(">", i)
            if j > 0:
                out.append(text[i:j + 1])
                i = j + 1
                continue
        i += 1
    return out


TEMPLATES: dict[str, ChatTemplate] = {
    "llama32": ChatTemplate(
        name="llama32",
        bos="<|begin_of_text|>",
        system_open="<|start_header_id|>system<|end_header_id|>\n\n",
        user_open="<|start_header_id|>user<|end_header_id|>\n\n",
        assistant_open="<|start_header_id|>assistant<|end_header_id|>\n\n",
        eot="<|eot_id|>",
        after_eot="",
        has_system=True,
    ),
    "gemma2": ChatTemplate(
        name="gemma2",
        bos="<bos>",
        system_open="",
        user_open="<start_of_turn>user\n",
        assistant_open="<start_of_turn>model\n",
        eot="<end_of_turn>",
        after_eot="\n",
        has_system=False,
    ),
    "qwen25": ChatTemplate(
        name="qwen25",
        bos="",
        system_open="<|im_start|>system\n",
        user_open="<|im_start|>user\n",
        assistant_open="<|im_start|>assistant\n",
        eot="<|im_end|>",
        after_eot="\n",
        has_system=True,
    ),
}


def get_template(name) -> ChatTemplate:
    if isinstance(name, ChatTemplate):
        return name
    try:
        return TEMPLATES[name]
    except KeyError:
        raise ValidationError(f"unknown template {name!r}; choose from {sorted(TEMPLATES)}") from None


def render_segments(conv: Conversation, template) -> list[tuple[str, Kind]]:
    """Typed pieces of the rendered conversation, in order."""
    tpl = get_template(template)
    if not conv.turns:
        raise EmptyConversation("a conversation needs at least one turn")
    segs: list[tuple[str, Kind]] = []

    def add(text, kind=Kind.TEXT):
        if text:
            segs.append((text, kind))

    add(tpl.bos)
    system = conv.system_prompt
    if tpl.has_system:
        if system is None:
            system = DEFAULT_SYSTEM_PROMPT
        if system:
            add(tpl.system_open)
            add(system)
            add(tpl.eot, Kind.EOT)
            add(tpl.after_eot)
    elif system:
        warnings.warn(
            f"template {tpl.name} has no system role; system prompt dropped",
            stacklevel=2,
        )
    for i, turn in enumerate(conv.turns):
        add(tpl.user_open)
        query = turn.query
        if i == 0:
            if SIGNAL_PLACEHOLDER in query:
                before, _, after = query.partition(SIGNAL_PLACEHOLDER)
                add(before)
                add(SIGNAL_PLACEHOLDER, Kind.SIGNAL)
                add(after)
            else:
                add(SIGNAL_PLACEHOLDER, Kind.SIGNAL)
                add("\n" + query)
        else:
            add(query)
        add(tpl.eot, Kind.EOT)
        add(tpl.after_eot)
        add(tpl.assistant_open)
        add(turn.response, Kind.RESPONSE)
        add(tpl.eot, Kind.RESPONSE_EOT)
        add(tpl.after_eot)
    rendered = "".join(text for text, _ in segs)
    if rendered.count(SIGNAL_PLACEHOLDER) != 1:
        raise MissingSignalPlaceholder(
            f"expected exactly one {SIGNAL_PLACEHOLDER} in the first query block, "
            f"found {rendered.count(SIGNAL_PLACEHOLDER)}"
        )
    return segs


def render_template(conv: Conversation, template) -> str:
    return "".join(text for text, _ in render_segments(conv, template))


def all_control_tokens() -> list[str]:
    tokens = {SIGNAL_PLACEHOLDER}
    for tpl in TEMPLATES.values():
        tokens.update(tpl.control_tokens)
    return sorted(tokens)


def eot_tokens() -> list[str]:
    return sorted({tpl.eot for tpl in TEMPLATES.values()})


def turns_from_pairs(pairs: Sequence[tuple[str, str]]) -> tuple[Turn, ...]:
    return tuple(Turn(q, s) for q, s in pairs)
