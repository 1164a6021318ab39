"""Model transformation tools for the uvl2ivml MCP server."""

from typing import Any, Dict, Optional
import logging

from mcp.server.fastmcp import FastMCP

from ..config import Config
from ..errors import Uvl2IvmlError
from ..pipeline import transpile, validate_text, verify
from ..transformer import TransformOptions


logger = logging.getLogger(__name__)


def _options(
    mode: str, naming: str, project_name: Optional[str], enum_names: Optional[Dict[str, str]]
) -> TransformOptions:
    return TransformOptions(mode=mode, naming=naming, project_name=project_name, enum_names=enum_names or {})


def register_tools(mcp: FastMCP, config: Config) -> None:
    """Register UVL/IVML model tools."""

    @mcp.tool()
    def transform_uvl(
        uvl_text: str,
        mode: str = "faithful",
        naming: str = "suffix",
        project_name: Optional[str] = None,
        enum_names: Optional[Dict[str, str]] = None,
    ) -> Dict[str, Any]:
        """Transform a UVL feature model into an IVML project.

        Args:
            uvl_text: The UVL model source
            mode: "faithful" or "strict" group constraints
            naming: "suffix" or "pretty" generated names
            project_name: IVML project name (default: namespace or root feature)
            enum_names: Parent feature name to enum name overrides
        """
        try:
            result = transpile(uvl_text, _options(mode, naming, project_name, enum_names))
            return {
                "success": True,
                "data": result.text,
                "warnings": [w.format() for w in result.warnings],
            }
        except (Uvl2IvmlError, ValueError) as e:
            logger.error(f"Error transforming UVL model: {e}")
            return {
                "success": False,
                "error": str(e)
            }

    @mcp.tool()
    def check_uvl(uvl_text: str, mode: str = "strict", naming: str = "suffix") -> Dict[str, Any]:
        """Transform a boolean-level UVL model and compare configuration spaces.

        Args:
            uvl_text: The UVL model source
            mode: "faithful" or "strict" group constraints
            naming: "suffix" or "pretty" generated names
        """
        try:
            result = transpile(uvl_text, _options(mode, naming, None, None))
            report = verify(result, config.oracle)
            return {
                "success": True,
                "data": report.as_dict()
            }
        except (Uvl2IvmlError, ValueError) as e:
            logger.error(f"Error checking UVL model: {e}")
            return {
                "success": False,
                "error": str(e)
            }

    @mcp.tool()
    def validate_model(text: str, language: str = "uvl") -> Dict[str, Any]:
        """Validate UVL or IVML text and return its diagnostics.

        Args:
            text: The model source
            language: "uvl" or "ivml"
        """
        try:
            diagnostics = validate_text(text, language)
            return {
                "success": True,
                "data": {
                    "valid": not any(d.is_error for d in diagnostics),
                    "diagnostics": [d.format() for d in diagnostics],
                },
                "count": len(diagnostics)
            }
        except ValueError as e:
            logger.error(f"Error validating model: {e}")
            return {
                "success": False,
                "error": str(e)
            }
