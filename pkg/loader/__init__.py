from .module_loader import LoadedModule, ModuleLoader, ModuleState, universe_from_code

__all__ = ["LoadedModule", "ModuleLoader", "ModuleState", "universe_from_code"]
