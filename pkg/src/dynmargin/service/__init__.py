from .app import SeriesStore, ServiceState, create_app

__all__ = ["SeriesStore", "ServiceState", "create_app"]
