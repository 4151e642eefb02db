"""
Persistent hardware library.

A library directory holds ``manifest.json`` plus one copied Verilog file per
registered module. Entries record the module's ordered inputs and outputs, its
latency in cycles and its resources, and carry call-site binding records for
the normal, if and else contexts so ``Call_V("label", outs..., ins...)`` can
be used anywhere in a design.

Registration is single-writer: it takes an exclusive lock file next to the
manifest and replaces the manifest atomically. Lookups only read.
"""

import json
import logging
import os
import shutil
import tempfile
import time
from contextlib import contextmanager
from dataclasses import asdict, replace
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Union

from core.codegen.function_library import LIBRARY_MODULES
from core.codegen.net_namer import VERILOG_KEYWORDS
from core.design_interfaces import LibraryEntry, ResourceCost
from core.errors import (
    ArityError,
    CorruptManifest,
    DuplicateLabel,
    InvalidEntry,
    LibraryLocked,
    MissingFile,
    NotFound,
)
from utils.validation_schemas import get_validator

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
LOCK_NAME = ".manifest.lock"
MANIFEST_VERSION = 1

# kind -> contexts in which the module may be called
BINDING_CONTEXTS = {
    "normal": ("normal", "if", "else"),
    "if_variant": ("if",),
    "else_variant": ("else",),
}


def binding_records(entry: LibraryEntry) -> Dict[str, str]:
    """Call signature per allowed block context."""
    args = ", ".join([f'"{entry.label}"', *entry.outputs, *entry.inputs])
    signature = f"Call_V({args})"
    records = {}
    for context in BINDING_CONTEXTS.get(entry.kind, ()):
        suffix = "" if context == "normal" else f"  # inside {context.title()}_V"
        records[context] = signature + suffix
    return records


def entry_to_json(entry: LibraryEntry) -> Dict[str, Any]:
    return {
        "label": entry.label,
        "verilog_path": entry.verilog_path,
        "inputs": list(entry.inputs),
        "outputs": list(entry.outputs),
        "cycles": entry.cycles,
        "resources": asdict(entry.resources),
        "kind": entry.kind,
        "bindings": dict(entry.bindings),
    }


def entry_from_json(data: Dict[str, Any]) -> LibraryEntry:
    return LibraryEntry(
        label=data["label"],
        verilog_path=data["verilog_path"],
        inputs=tuple(data["inputs"]),
        outputs=tuple(data["outputs"]),
        cycles=data["cycles"],
        resources=ResourceCost(**data["resources"]),
        kind=data.get("kind", "normal"),
        bindings=tuple(sorted(data.get("bindings", {}).items())),
    )


class HardwareLibrary:
    """One library directory and its manifest."""

    def __init__(self, lib_dir: Union[str, Path], lock_timeout: float = 5.0):
        self.lib_dir = Path(lib_dir)
        self.lock_timeout = lock_timeout

    @property
    def manifest_path(self) -> Path:
        return self.lib_dir / MANIFEST_NAME

    def _read_manifest(self) -> Dict[str, Any]:
        if not self.manifest_path.exists():
            return {"version": MANIFEST_VERSION, "entries": {}}
        try:
            data = json.loads(self.manifest_path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise CorruptManifest(f"{self.manifest_path} is not valid JSON: {exc}") from exc
        errors = get_validator().validate_library_manifest(data)
        if errors:
            raise CorruptManifest(f"{self.manifest_path}: {errors[0]}")
        for label, entry in data["entries"].items():
            if entry["label"] != label:
                raise CorruptManifest(f"{self.manifest_path}: entry '{label}' is labelled '{entry['label']}'")
        return data

    def _write_manifest(self, data: Dict[str, Any]) -> None:
        text = json.dumps(data, indent=2, sort_keys=True) + "\n"
        fd, tmp = tempfile.mkstemp(dir=self.lib_dir, prefix=".manifest_", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(text)
            os.replace(tmp, self.manifest_path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @contextmanager
    def _lock(self) -> Iterator[None]:
        lock_path = self.lib_dir / LOCK_NAME
        deadline = time.monotonic() + self.lock_timeout
        while True:
            try:
                fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
                break
            except FileExistsError:
                if time.monotonic() >= deadline:
                    raise LibraryLocked(f"{self.lib_dir} is locked by another writer ({lock_path})")
                time.sleep(0.05)
        try:
            os.write(fd, str(os.getpid()).encode())
            os.close(fd)
            yield
        finally:
            os.unlink(lock_path)

    @staticmethod
    def _check_entry(entry: LibraryEntry) -> None:
        if not entry.inputs or not entry.outputs:
            raise ArityError(f"library module '{entry.label}' needs at least one input and one output")
        if entry.label in LIBRARY_MODULES or entry.label in VERILOG_KEYWORDS:
            raise InvalidEntry(f"'{entry.label}' is a reserved module name")
        if entry.kind not in BINDING_CONTEXTS:
            raise InvalidEntry(f"unknown entry kind '{entry.kind}'")
        ports = list(entry.inputs) + list(entry.outputs)
        if len(set(ports)) != len(ports) or {"clk", "rst"} & set(ports):
            raise InvalidEntry(f"'{entry.label}' has duplicate or reserved port names")
        errors = get_validator().validate_library_entry(entry_to_json(entry))
        if errors:
            raise InvalidEntry(f"invalid library entry '{entry.label}': {errors[0]}")

    def register(
        self,
        entry: LibraryEntry,
        source: Optional[Union[str, Path]] = None,
        force: bool = False,
    ) -> LibraryEntry:
        """Copy the module into the library and record it in the manifest.

        Args:
            entry: The module description; ``verilog_path`` is the source file
                unless ``source`` is given.
            source: Verilog file to copy.
            force: Replace an existing entry with the same label.

        Returns:
            The stored entry, with a library-relative path and binding records.

        Raises:
            MissingFile: if the Verilog file does not exist.
            ArityError: if the input or output list is empty.
            InvalidEntry: if the label, ports, cycles or resources are invalid.
            DuplicateLabel: if the label is taken and ``force`` is False.
            LibraryLocked: if another writer holds the lock.
        """
        source = Path(source or entry.verilog_path)
        if not source.is_file():
            raise MissingFile(f"Verilog file not found: {source}")
        stored = replace(entry, verilog_path=f"{entry.label}.v")
        stored = replace(stored, bindings=tuple(sorted(binding_records(stored).items())))
        self._check_entry(stored)

        self.lib_dir.mkdir(parents=True, exist_ok=True)
        with self._lock():
            manifest = self._read_manifest()
            if entry.label in manifest["entries"] and not force:
                raise DuplicateLabel(f"label '{entry.label}' is already registered in {self.lib_dir}")
            destination = self.lib_dir / stored.verilog_path
            if source.resolve() != destination.resolve():
                shutil.copyfile(source, destination)
            manifest["entries"][entry.label] = entry_to_json(stored)
            self._write_manifest(manifest)
        logger.info(
            f"Registered '{entry.label}' ({len(entry.inputs)} in, {len(entry.outputs)} out, "
            f"{entry.cycles} cycle(s)) in {self.lib_dir}"
        )
        return stored

    def lookup(self, label: str) -> LibraryEntry:
        """Entry registered under ``label``.

        Raises:
            NotFound: if no such entry exists.
            CorruptManifest: if the manifest cannot be read.
        """
        entries = self._read_manifest()["entries"]
        if label not in entries:
            raise NotFound(f"library module '{label}' is not registered in {self.lib_dir}")
        return entry_from_json(entries[label])

    def entries(self) -> List[LibraryEntry]:
        return [
            entry_from_json(data)
            for _, data in sorted(self._read_manifest()["entries"].items())
        ]

    def verilog_file(self, entry: LibraryEntry) -> Path:
        return self.lib_dir / entry.verilog_path

    def sources(self, labels: Optional[List[str]] = None) -> Dict[str, str]:
        """Verilog text of the given (or all) entries, keyed by file name."""
        chosen = [self.lookup(label) for label in labels] if labels is not None else self.entries()
        texts: Dict[str, str] = {}
        for entry in chosen:
            path = self.verilog_file(entry)
            if not path.is_file():
                raise MissingFile(f"library file missing for '{entry.label}': {path}")
            texts[entry.verilog_path] = path.read_text(encoding="utf-8")
        return texts


def register_module(
    entry: LibraryEntry,
    lib: Union[str, Path],
    source: Optional[Union[str, Path]] = None,
    force: bool = False,
) -> LibraryEntry:
    return HardwareLibrary(lib).register(entry, source, force)


def lookup(label: str, lib: Union[str, Path]) -> LibraryEntry:
    return HardwareLibrary(lib).lookup(label)
