"""
Jinja2 environment shared by every Verilog emitter.
"""

import logging
from pathlib import Path
from typing import Any, Dict

from jinja2 import Environment, FileSystemLoader, StrictUndefined, Template

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).with_name("templates")


class TemplateRenderer:
    """Loads templates once and renders them with strict undefined checking."""

    def __init__(self, template_dir: Path = TEMPLATE_DIR):
        self.env = Environment(
            loader=FileSystemLoader(str(template_dir)),
            keep_trailing_newline=True,
            trim_blocks=True,
            lstrip_blocks=True,
            undefined=StrictUndefined,
        )
        self.template_cache: Dict[str, Template] = {}

    def get_template(self, filename: str) -> Template:
        if filename in self.template_cache:
            return self.template_cache[filename]
        template = self.env.get_template(filename)
        self.template_cache[filename] = template
        return template

    def render(self, filename: str, **context: Any) -> str:
        return self.get_template(filename).render(**context)


_renderer = None


def get_renderer() -> TemplateRenderer:
    global _renderer
    if _renderer is None:
        _renderer = TemplateRenderer()
    return _renderer
