"""Function registry: command examples, function specs, and prompt assembly.

A Registry is an immutable snapshot loaded from a single JSON file per
instrument.  Every cog system prompt is assembled deterministically from it
at inference time, so identical (registry, style) inputs produce
byte-identical prompts.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import DuplicateId, InvalidEntry, MalformedRegistry, MissingBasePrompt
from .sim import parse_program

CLASS_ORDER = ("Op", "Ana", "Notebook", "gpcam", "xicam")


class PromptStyle(enum.Enum):
    LIST = "LIST"
    ID = "ID"
    ONE_WORD = "ONE_WORD"


@dataclass(frozen=True)
class FunctionEntry:
    id: str
    input_phrase: str
    output_code: str
    command_class: str
    signature: Optional[str] = None
    param_docs: tuple = ()  # (name, semantic type, description) triples
    usage_examples: tuple = ()  # (phrase, code) pairs
    notes: Optional[str] = None
    extra_phrases: tuple = ()
    unchecked: bool = False

    def validate(self) -> None:
        if self.command_class not in CLASS_ORDER:
            raise InvalidEntry(
                f"entry {self.id!r}: unknown command class {self.command_class!r}"
            )
        if not self.unchecked:
            try:
                parse_program(self.output_code)
            except Exception as exc:
                raise InvalidEntry(
                    f"entry {self.id!r}: output code does not parse: {exc}"
                ) from exc

    def phrases(self):
        """All phrases this entry contributes to the classifier prompt."""
        yield self.input_phrase
        for phrase, _ in self.usage_examples:
            yield phrase
        yield from self.extra_phrases


@dataclass(frozen=True)
class Registry:
    entries: tuple = ()
    base_prompts: dict = field(default_factory=dict)
    version: int = 0


# --- serialization -----------------------------------------------------


def _entry_from_dict(d: dict) -> FunctionEntry:
    try:
        return FunctionEntry(
            id=d["id"],
            input_phrase=d["input"],
            output_code=d["output"],
            command_class=d["class"],
            signature=d.get("signature"),
            param_docs=tuple(tuple(p) for p in d.get("param_docs", [])),
            usage_examples=tuple(tuple(u) for u in d.get("usage_examples", [])),
            notes=d.get("notes"),
            extra_phrases=tuple(d.get("extra_phrases", [])),
            unchecked=bool(d.get("unchecked", False)),
        )
    except (KeyError, TypeError) as exc:
        raise MalformedRegistry(
            f"bad entry: {exc}", entry_id=d.get("id")
        ) from exc


def _entry_to_dict(e: FunctionEntry) -> dict:
    d = {"id": e.id, "input": e.input_phrase, "output": e.output_code, "class": e.command_class}
    if e.signature is not None:
        d["signature"] = e.signature
    if e.param_docs:
        d["param_docs"] = [list(p) for p in e.param_docs]
    if e.usage_examples:
        d["usage_examples"] = [list(u) for u in e.usage_examples]
    if e.notes is not None:
        d["notes"] = e.notes
    if e.extra_phrases:
        d["extra_phrases"] = list(e.extra_phrases)
    if e.unchecked:
        d["unchecked"] = True
    return d


def load_registry(path) -> Registry:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise MalformedRegistry(f"cannot read registry {path}: {exc}") from exc
    if not isinstance(data, dict) or "entries" not in data:
        raise MalformedRegistry("registry file must be an object with an 'entries' list")
    entries = []
    seen = set()
    for raw in data["entries"]:
        entry = _entry_from_dict(raw)
        if entry.id in seen:
            raise DuplicateId(f"duplicate entry id {entry.id!r}", entry_id=entry.id)
        seen.add(entry.id)
        try:
            entry.validate()
        except InvalidEntry as exc:
            raise MalformedRegistry(str(exc), entry_id=entry.id) from exc
        entries.append(entry)
    return Registry(
        entries=tuple(entries),
        base_prompts=dict(data.get("base_prompts", {})),
        version=int(data.get("version", 0)),
    )


def save_registry(reg: Registry, path) -> None:
    """Canonical serialization: fixed key order, UTF-8, LF newlines."""
    data = {
        "version": reg.version,
        "base_prompts": reg.base_prompts,
        "entries": [_entry_to_dict(e) for e in reg.entries],
    }
    text = json.dumps(data, indent=2, ensure_ascii=False) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def append_function(reg: Registry, entry: FunctionEntry) -> Registry:
    """Return a new registry with the entry appended (or replaced in place)."""
    entry.validate()
    entries = list(reg.entries)
    for i, existing in enumerate(entries):
        if existing.id == entry.id:
            entries[i] = entry
            break
    else:
        entries.append(entry)
    return replace(reg, entries=tuple(entries), version=reg.version + 1)


# --- prompt assembly ---------------------------------------------------

OUTPUT_FORMATS = {
    PromptStyle.ONE_WORD: (
        "3. Strictly provide the output only in the following format:\n"
        "\n"
        "   - Output only one word indicating the class:\n"
        "     - Op\n"
        "     - Ana\n"
        "     - Notebook\n"
        "     - gpcam\n"
        "     - xicam\n"
        "\n"
        "4. Always output one word corresponding to the identified class."
    ),
    PromptStyle.ID: (
        "3. Strictly provide the output only in the following format:\n"
        "\n"
        "   - Output only the numerical ID of the identified class:\n"
        "     - 0: Op\n"
        "     - 1: Ana\n"
        "     - 2: Notebook\n"
        "     - 3: gpcam\n"
        "     - 4: xicam\n"
        "\n"
        "4. Always output one number corresponding to the identified class."
    ),
    PromptStyle.LIST: (
        "3. Strictly provide the output only in the following format:\n"
        "\n"
        "   - Output a one-hot encoded vector over the classes, in this order:\n"
        "     [Op, Ana, Notebook, gpcam, xicam]\n"
        "     For example, [1, 0, 0, 0, 0] indicates Op.\n"
        "\n"
        "4. Always output one vector corresponding to the identified class."
    ),
}


def _class_label(command_class: str, style: PromptStyle) -> str:
    if style is PromptStyle.ONE_WORD:
        return command_class
    idx = CLASS_ORDER.index(command_class)
    if style is PromptStyle.ID:
        return str(idx)
    vec = ["1" if i == idx else "0" for i in range(len(CLASS_ORDER))]
    return "[" + ", ".join(vec) + "]"


def _base_prompt(reg: Registry, name: str) -> str:
    try:
        return reg.base_prompts[name]
    except KeyError:
        raise MissingBasePrompt(f"registry has no base prompt for {name!r}") from None


def _example_blocks(pairs) -> str:
    out = []
    for k, (phrase, label) in enumerate(pairs, start=1):
        out.append(f"\nExample {k}:\nUser Prompt: {phrase}\nYour Output: {label}\n")
    return "".join(out)


def build_classifier_prompt(reg: Registry, style: PromptStyle) -> str:
    base = _base_prompt(reg, "classifier").replace(
        "{output_format}", OUTPUT_FORMATS[style]
    )
    pairs = []
    for entry in reg.entries:
        label = _class_label(entry.command_class, style)
        for phrase in entry.phrases():
            pairs.append((phrase, label))
    if not pairs:
        return base + "\n"
    return base + _example_blocks(pairs)


def build_analyst_prompt(reg: Registry) -> str:
    base = _base_prompt(reg, "analyst")
    pairs = [
        (phrase, entry.output_code)
        for entry in reg.entries
        if entry.command_class == "Ana"
        for phrase in entry.phrases()
    ]
    if not pairs:
        return base + "\n"
    return base + _example_blocks(pairs)


def build_refiner_prompt(reg: Registry) -> str:
    return _base_prompt(reg, "refiner")


def _render_user_function(entry: FunctionEntry) -> str:
    lines = [f'- Input: "{entry.input_phrase}"', f"    - Output: `{entry.output_code}`"]
    if entry.signature:
        lines.append(f"    - Signature: `{entry.signature}`")
    if entry.param_docs:
        lines.append("    - Params:")
        for name, semtype, desc in entry.param_docs:
            lines.append(f"        - {name}: {semtype} ({desc})")
    if entry.notes:
        lines.append(f"    - Notes: {entry.notes}")
    for phrase, code in entry.usage_examples:
        lines.append(f'- Input: "{phrase}"')
        lines.append(f"    - Output: `{code}`")
    return "\n".join(lines)


def build_operator_prompt(reg: Registry) -> str:
    base = _base_prompt(reg, "operator")
    op_entries = [e for e in reg.entries if e.command_class == "Op"]
    if op_entries:
        body = "\n".join(_render_user_function(e) for e in op_entries)
    else:
        body = "none"
    section = "User added functions:\n" + body
    if "{user_functions}" in base:
        return base.replace("{user_functions}", section)
    return base + "\n\n" + section + "\n"
