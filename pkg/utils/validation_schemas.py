"""
JSON schemas for the build configuration and the hardware library manifest.

Files that fail validation are rejected with a dotted field path before any
build or registration starts.
"""

from typing import Any, Dict, List, Optional
from jsonschema import Draft7Validator
import logging

logger = logging.getLogger(__name__)

_IDENTIFIER = "^[A-Za-z_][A-Za-z0-9_]*$"

_NON_NEGATIVE = {"type": "integer", "minimum": 0}

RESOURCE_SCHEMA = {
    "type": "object",
    "properties": {
        "lut": _NON_NEGATIVE,
        "ff": _NON_NEGATIVE,
        "dsp": _NON_NEGATIVE,
        "bram": _NON_NEGATIVE
    },
    "required": ["lut", "ff", "dsp", "bram"],
    "additionalProperties": False
}

APP_CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "AppConfig",
    "description": "Schema for app_config.json",
    "type": "object",
    "properties": {
        "build": {
            "type": "object",
            "properties": {
                "mode": {"type": "string", "enum": ["unrolled", "pipelined"]},
                "out_dir": {"type": "string", "minLength": 1},
                "lib_dir": {"type": "string", "minLength": 1},
                "seed": {"type": "integer", "minimum": 0},
                "stim": {"type": "integer", "minimum": 1},
                "range": {
                    "type": "array",
                    "items": {"type": "number", "minimum": -32768, "maximum": 32767},
                    "minItems": 2,
                    "maxItems": 2
                },
                "emit_testbench": {"type": "boolean"},
                "emit_report": {"type": "boolean"},
                "assertions": {"type": "boolean"},
                "max_workers": {"type": "integer", "minimum": 1}
            },
            "additionalProperties": False
        },
        "logging": {
            "type": "object",
            "properties": {
                "level": {
                    "type": "string",
                    "enum": ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
                }
            },
            "additionalProperties": False
        },
        "limits": {
            "type": "object",
            "properties": {
                "memory_budget_mb": {"type": "integer", "minimum": 1}
            },
            "additionalProperties": False
        }
    },
    "required": ["build"],
    "additionalProperties": False
}

LIBRARY_ENTRY_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "LibraryEntry",
    "description": "Schema for one registered hardware module",
    "type": "object",
    "properties": {
        "label": {"type": "string", "pattern": _IDENTIFIER},
        "verilog_path": {"type": "string", "minLength": 1},
        "inputs": {
            "type": "array",
            "items": {"type": "string", "pattern": _IDENTIFIER},
            "minItems": 1
        },
        "outputs": {
            "type": "array",
            "items": {"type": "string", "pattern": _IDENTIFIER},
            "minItems": 1
        },
        "cycles": {"type": "integer", "minimum": 1},
        "resources": RESOURCE_SCHEMA,
        "kind": {"type": "string", "enum": ["normal", "if_variant", "else_variant"]},
        "bindings": {
            "type": "object",
            "properties": {
                "normal": {"type": "string"},
                "if": {"type": "string"},
                "else": {"type": "string"}
            },
            "minProperties": 1,
            "additionalProperties": False
        }
    },
    "required": ["label", "verilog_path", "inputs", "outputs", "cycles", "resources"],
    "additionalProperties": False
}

LIBRARY_MANIFEST_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "LibraryManifest",
    "description": "Schema for <lib>/manifest.json",
    "type": "object",
    "properties": {
        "version": {"type": "integer", "const": 1},
        "entries": {
            "type": "object",
            "additionalProperties": LIBRARY_ENTRY_SCHEMA
        }
    },
    "required": ["version", "entries"],
    "additionalProperties": False
}


def _format_error(error) -> str:
    path = ".".join(str(p) for p in error.absolute_path)
    return f"{path}: {error.message}" if path else error.message


class SchemaValidator:
    """Draft-7 validators for app_config.json and the library manifest."""

    def __init__(self):
        self._validators = {
            "app_config": Draft7Validator(APP_CONFIG_SCHEMA),
            "library_entry": Draft7Validator(LIBRARY_ENTRY_SCHEMA),
            "library_manifest": Draft7Validator(LIBRARY_MANIFEST_SCHEMA),
        }

    def _check(self, kind: str, data: Any) -> List[str]:
        found = sorted(
            self._validators[kind].iter_errors(data),
            key=lambda e: [str(p) for p in e.absolute_path],
        )
        if found:
            logger.debug(f"{kind}: {len(found)} schema violation(s)")
        return [_format_error(e) for e in found]

    def validate_app_config(self, data: Dict[str, Any]) -> List[str]:
        return self._check("app_config", data)

    def validate_library_manifest(self, data: Dict[str, Any]) -> List[str]:
        return self._check("library_manifest", data)

    def validate_library_entry(self, data: Dict[str, Any]) -> List[str]:
        """Check one serialized entry before it is written to the manifest."""
        return self._check("library_entry", data)


_validator: Optional[SchemaValidator] = None


def get_validator() -> SchemaValidator:
    global _validator
    if _validator is None:
        _validator = SchemaValidator()
    return _validator
