"""MCP server exposing the UVL to IVML transformation."""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from mcp.server.fastmcp import FastMCP

from . import __version__
from .config import Config, get_example_env, load_config
from .tools import models


logger = logging.getLogger(__name__)

INSTRUCTIONS = (
    "Transforms UVL feature models into IVML projects. Use transform_uvl for the IVML text, "
    "check_uvl to compare the configuration spaces of a boolean-level model and validate_model "
    "to get diagnostics for UVL or IVML text."
)

TRANSPORTS = ("stdio", "sse")


class Uvl2IvmlMCPServer:
    """FastMCP server with the model tools and a configuration tool."""

    TOOL_MODULES = [models]

    def __init__(self, config: Config):
        self.config = config
        self.mcp = FastMCP(config.server.server_name, instructions=INSTRUCTIONS)
        if config.server.debug:
            logging.getLogger().setLevel(logging.DEBUG)
            logger.debug("Debug logging enabled by configuration")
        self.tool_sources: List[str] = []
        self._register_tools()
        self._register_config_tools()

    def _register_tools(self) -> None:
        for module in self.TOOL_MODULES:
            register = getattr(module, "register_tools", None)
            if register is None:
                logger.warning(f"{module.__name__} has no register_tools()")
                continue
            register(self.mcp, self.config)
            self.tool_sources.append(module.__name__)
            logger.info(f"Registered tools from {module.__name__}")

    def _register_config_tools(self) -> None:
        @self.mcp.tool()
        def get_config_info() -> Dict[str, Any]:
            """Report the server identity and the oracle limits in effect."""
            return {
                "success": True,
                "data": {
                    "server": self.config.server.model_dump(),
                    "oracle": self.config.oracle.model_dump(),
                    "package_version": __version__,
                },
            }

    def run(self, transport: str = "stdio") -> None:
        """Serve until interrupted."""
        logger.info(
            f"Starting {self.config.server.server_name} v{self.config.server.server_version} over {transport}"
        )
        try:
            self.mcp.run(transport=transport)  # type: ignore[arg-type]
        except KeyboardInterrupt:
            logger.info("Interrupted, shutting down")


def create_server(config: Optional[Config] = None) -> Uvl2IvmlMCPServer:
    """Build a server from ``config``, or from the environment when omitted."""
    return Uvl2IvmlMCPServer(config if config is not None else load_config())


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Entry point of ``uvl2ivml-mcp``."""
    parser = argparse.ArgumentParser(prog="uvl2ivml-mcp", description="uvl2ivml MCP server")
    parser.add_argument("--transport", choices=TRANSPORTS, default="stdio")
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    try:
        server = create_server()
    except ValueError as e:
        logger.error(str(e))
        print(f"uvl2ivml-mcp: {e}", file=sys.stderr)
        print("Valid settings look like:\n" + get_example_env(), file=sys.stderr)
        sys.exit(1)
    server.run(args.transport)


if __name__ == "__main__":
    main()
