"""Configuration management for the sector eigenvalue solver."""

import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Settings:
    """Application settings loaded from environment variables."""

    # Quadrature / assembly
    QUADRATURE_POINTS = int(os.getenv('QUADRATURE_POINTS', 6))  # per direction
    ASSEMBLY_CHUNK_SIZE = int(os.getenv('ASSEMBLY_CHUNK_SIZE', 1024))  # elements

    # Eigensolver
    EIGEN_TOLERANCE = float(os.getenv('EIGEN_TOLERANCE', 1e-10))
    EIGEN_MAX_RETRIES = int(os.getenv('EIGEN_MAX_RETRIES', 3))
    DENSE_SIZE_LIMIT = int(os.getenv('DENSE_SIZE_LIMIT', 5000))  # free DOFs

    # Parallel execution
    MAX_PARALLEL_WORKERS = int(os.getenv('MAX_PARALLEL_WORKERS', 4))

    # Caches
    BESSEL_CACHE_SIZE = int(os.getenv('BESSEL_CACHE_SIZE', 4096))

    # Output
    OUTPUT_DIR = os.getenv('OUTPUT_DIR', 'results')
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()

    RANDOM_SEED = int(os.getenv('RANDOM_SEED', 0))

    @classmethod
    def get_all(cls) -> dict:
        """Get all settings as a dictionary."""
        return {
            key: value for key, value in cls.__dict__.items()
            if not key.startswith('_') and not callable(value)
            and not isinstance(value, classmethod)
        }


# Create a singleton instance
settings = Settings()
