"""Case documents on disk.

A case file is a single JSON or YAML document holding a ``schema_version``
next to the sections of :class:`~reserveflow.model.MarketCase`. Both
encodings go through the same :class:`CaseFile` schema.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import TYPE_CHECKING, Literal

import yaml
from pydantic import ValidationError

from .exceptions import CaseParseError, CaseSchemaError, CaseValidationError
from .model import MarketCase, validate_case

try:
    from yaml import CDumper as Dumper
    from yaml import CLoader as Loader
except ImportError:  # pragma: no cover
    from yaml import Dumper, Loader  # type: ignore[assignment]

if TYPE_CHECKING:
    from typing import Any, Optional, TextIO, Union

    from .types import Document


logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class CaseFile(MarketCase):
    schema_version: Literal[1]

    def to_case(self) -> MarketCase:
        return MarketCase.model_validate(self.model_dump(exclude={"schema_version"}))


class Serializer:
    suffixes: tuple[str, ...]

    def __init__(self, path: Union[Path, str]) -> None:
        path = Path(path)
        self.path = path if path.suffix in self.suffixes else path.with_suffix(self.suffixes[0])

    def serialize(self, obj: Document) -> None:
        raise NotImplementedError(
            "This method must be overridden by subclasses"
        )  # pragma: no cover

    def deserialize(self) -> Any:
        raise NotImplementedError(
            "This method must be overridden by subclasses"
        )  # pragma: no cover

    def _writer(self) -> TextIO:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        return self.path.open(mode="w")


class JSONSerializer(Serializer):
    suffixes = (".json",)

    def serialize(self, obj: Document) -> None:
        with self._writer() as stream:
            json.dump(obj, stream, indent=2)
            stream.write("\n")

    def deserialize(self) -> Any:
        try:
            with self.path.open() as stream:
                return json.load(stream)
        except json.JSONDecodeError as error:
            raise CaseParseError(error.msg, error.lineno, error.colno) from error


class YAMLSerializer(Serializer):
    suffixes = (".yaml", ".yml")

    def serialize(self, obj: Document) -> None:
        with self._writer() as stream:
            yaml.dump(obj, stream, Dumper=Dumper, sort_keys=False)

    def deserialize(self) -> Any:
        try:
            with self.path.open() as stream:
                return yaml.load(stream, Loader=Loader)
        except yaml.MarkedYAMLError as error:
            mark = error.problem_mark
            line, column = (mark.line + 1, mark.column + 1) if mark else (0, 0)
            raise CaseParseError(str(error.problem), line, column) from error


SERIALIZERS: tuple[type[Serializer], ...] = (JSONSerializer, YAMLSerializer)


def serializer_for(path: Union[Path, str]) -> Serializer:
    suffix = Path(path).suffix.lower()
    for serializer in SERIALIZERS:
        if suffix in serializer.suffixes:
            return serializer(path)
    raise CaseParseError(f"Unsupported case file suffix {suffix!r}")


def _locate(text: str, location: tuple[Union[int, str], ...]) -> Optional[tuple[int, int]]:
    """Line and column of the node at ``location`` in a JSON or YAML document."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return None
    for key in location:
        if isinstance(node, yaml.MappingNode):
            match = [value for name, value in node.value if name.value == str(key)]
            if not match:
                break
            node = match[0]
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            break
    if node is None:
        return None
    return node.start_mark.line + 1, node.start_mark.column + 1


def _dotted(location: tuple[Union[int, str], ...]) -> str:
    text = ""
    for key in location:
        text += f"[{key}]" if isinstance(key, int) else f".{key}" if text else str(key)
    return text or "<document>"


def load_case_file(path: Union[Path, str]) -> CaseFile:
    """Parse and schema-check a case file without semantic validation."""
    serializer = serializer_for(path)
    document = serializer.deserialize()
    if not isinstance(document, dict):
        raise CaseSchemaError(["<document>: expected a mapping of case sections"])

    try:
        return CaseFile.model_validate(document)
    except ValidationError as error:
        text = serializer.path.read_text()
        problems = []
        for item in error.errors():
            location = tuple(item["loc"])
            position = _locate(text, location) or (0, 0)
            if item["type"].endswith("_parsing"):
                raise CaseParseError(
                    f"{_dotted(location)}: {item['msg']}", *position
                ) from error
            problems.append(
                f"{_dotted(location)} (line {position[0]}, column {position[1]}): {item['msg']}"
            )
        raise CaseSchemaError(problems) from error


def parse_case(path: Union[Path, str]) -> MarketCase:
    """Load a case file and reject it unless it validates."""
    case = load_case_file(path).to_case()
    report = validate_case(case)
    for warning in report.warnings:
        logger.warning(f"{Path(path).name}: {warning}")
    if not report.ok:
        raise CaseValidationError(report.errors)
    logger.debug(
        f"Parsed {case.name!r}: {case.n_buses} buses, {case.n_generators} generators, "
        f"{case.n_loads} loads, {case.n_scenarios} scenarios"
    )
    return case


def case_to_document(case: MarketCase) -> Document:
    document: Document = {"schema_version": SCHEMA_VERSION}
    document.update(case.model_dump(mode="json"))
    return document


def dump_case(case: MarketCase, path: Union[Path, str]) -> Path:
    serializer = serializer_for(path)
    serializer.serialize(case_to_document(case))
    logger.debug(f"Wrote {case.name!r} to {serializer.path}")
    return serializer.path
