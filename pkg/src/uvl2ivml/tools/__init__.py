"""uvl2ivml MCP server tools package."""

__all__ = ["models"]
