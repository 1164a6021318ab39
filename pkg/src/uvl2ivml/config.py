"""Configuration management for uvl2ivml."""

import os
from typing import Optional

from dotenv import find_dotenv, load_dotenv
from pydantic import BaseModel, Field, validator


DEFAULT_MAX_FEATURES = 24
DEFAULT_MAX_ASSIGNMENTS = 2**24
DEFAULT_MAX_SAMPLES = 5


class OracleConfig(BaseModel):
    """Limits for brute-force configuration enumeration."""

    max_features: int = Field(
        default=DEFAULT_MAX_FEATURES, description="Maximum number of decision features to enumerate"
    )
    max_assignments: int = Field(
        default=DEFAULT_MAX_ASSIGNMENTS, description="Maximum size of the IVML assignment space"
    )
    max_samples: int = Field(default=DEFAULT_MAX_SAMPLES, description="Counterexamples kept in a report")

    @validator("max_features", "max_assignments", "max_samples")
    def validate_positive(cls, v: int) -> int:
        """Validate that limits are positive."""
        if v <= 0:
            raise ValueError("Enumeration limits must be positive")
        return v

    def with_cap(self, cap: Optional[int]) -> "OracleConfig":
        """Copy with ``max_features`` replaced when ``cap`` is given."""
        if cap is None:
            return self
        return OracleConfig(max_features=cap, max_assignments=self.max_assignments, max_samples=self.max_samples)


class ServerConfig(BaseModel):
    """Configuration for the MCP server."""

    server_name: str = Field(default="UVL2IVML MCP Server", description="Name of the MCP server")
    server_version: str = Field(default="0.1.0", description="Version of the MCP server")
    debug: bool = Field(default=False, description="Enable debug mode")


class Config(BaseModel):
    """Main configuration class."""

    oracle: OracleConfig = Field(default_factory=OracleConfig)
    server: ServerConfig = Field(default_factory=ServerConfig)

    @classmethod
    def from_env(cls) -> "Config":
        """Create configuration from environment variables."""
        oracle_config = OracleConfig(
            max_features=int(os.getenv("UVL2IVML_CAP", str(DEFAULT_MAX_FEATURES))),
            max_assignments=int(os.getenv("UVL2IVML_ASSIGNMENT_CAP", str(DEFAULT_MAX_ASSIGNMENTS))),
            max_samples=int(os.getenv("UVL2IVML_SAMPLES", str(DEFAULT_MAX_SAMPLES))),
        )

        debug = os.getenv("DEBUG", "false").lower() == "true" or os.getenv("UVL2IVML_DEBUG", "false").lower() == "true"
        server_config = ServerConfig(
            server_name=os.getenv("MCP_SERVER_NAME", "UVL2IVML MCP Server"),
            server_version=os.getenv("MCP_SERVER_VERSION", "0.1.0"),
            debug=debug,
        )

        return cls(oracle=oracle_config, server=server_config)


def load_config() -> Config:
    """Load and validate configuration from ``.env`` and environment variables."""
    try:
        load_dotenv(find_dotenv(usecwd=True))
        return Config.from_env()
    except Exception as e:
        raise ValueError(f"Configuration error: {str(e)}")


def get_example_env() -> str:
    """Get example environment variables configuration."""
    return """
# uvl2ivml configuration
# All variables are optional.

# Oracle limits:
UVL2IVML_CAP=24
UVL2IVML_ASSIGNMENT_CAP=16777216
UVL2IVML_SAMPLES=5

# MCP Server settings:
MCP_SERVER_NAME="UVL2IVML MCP Server"
MCP_SERVER_VERSION="0.1.0"
DEBUG=false
""".strip()
