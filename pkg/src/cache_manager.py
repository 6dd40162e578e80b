#!/usr/bin/env python3
"""
Cache Manager Module
====================

Cache des résultats d'expériences.

Fonctionnalités:
- Stockage des résultats en JSON
- Clés SHA-256 de la spécification canonique et de la version du package
- Pas d'expiration: une expérience est une fonction pure de sa spécification
- Erreurs d'entrée/sortie journalisées, jamais fatales
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

logger = logging.getLogger('Percolation.cache')


def spec_key(kind: str, spec: Dict[str, Any], version: str) -> str:
    """
    Clé canonique d'une expérience

    Example:
        >>> spec_key('qc', {'p': 0.1, 'tol': 0.25}, '1.0.0')
        '{"kind": "qc", "spec": {"p": 0.1, "tol": 0.25}, "version": "1.0.0"}'
    """
    return json.dumps({'kind': kind, 'spec': spec, 'version': version}, sort_keys=True)


class CacheManager:
    """
    Cache de résultats d'expériences

    Attributes:
        cache_dir (Path): Répertoire de stockage du cache
    """

    def __init__(self, cache_dir: str = '.cache'):
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)

        # Le cache n'est pas versionné
        gitignore_path = self.cache_dir / '.gitignore'
        if not gitignore_path.exists():
            gitignore_path.write_text('*\n!.gitignore\n', encoding='utf-8')

    def _get_cache_key(self, key: str) -> str:
        return hashlib.sha256(key.encode('utf-8')).hexdigest()

    def _path(self, key: str) -> Path:
        return self.cache_dir / f"{self._get_cache_key(key)}.json"

    def get(self, key: str) -> Optional[Any]:
        """
        Récupère un résultat en cache

        Returns:
            Les données cachées ou None si absent/corrompu
        """
        cache_file = self._path(key)
        if not cache_file.exists():
            return None

        try:
            with open(cache_file, 'r', encoding='utf-8') as f:
                data = json.load(f)
            logger.debug(f"💾 Résultat trouvé en cache ({cache_file.name[:12]})")
            return data
        except (json.JSONDecodeError, OSError) as e:
            logger.warning(f"⚠️  Erreur lecture cache: {e}")
            cache_file.unlink(missing_ok=True)
            return None

    def set(self, key: str, data: Any) -> bool:
        """
        Sauvegarde un résultat (doit être sérialisable en JSON)

        Returns:
            True si succès, False sinon
        """
        cache_file = self._path(key)
        try:
            with open(cache_file, 'w', encoding='utf-8') as f:
                json.dump(data, f, indent=2, ensure_ascii=False)
            return True
        except (TypeError, ValueError, OSError) as e:
            logger.warning(f"⚠️  Erreur écriture cache: {e}")
            cache_file.unlink(missing_ok=True)
            return False

    def clear(self) -> int:
        """
        Supprime tous les fichiers .json du répertoire de cache

        Returns:
            Nombre de fichiers supprimés
        """
        count = 0
        for cache_file in self.cache_dir.glob('*.json'):
            try:
                cache_file.unlink()
                count += 1
            except OSError:
                pass
        return count

    def get_cache_info(self) -> Dict[str, Any]:
        files = list(self.cache_dir.glob('*.json'))
        total_size = sum(f.stat().st_size for f in files)
        return {
            'total_files': len(files),
            'total_size_bytes': total_size,
            'total_size_mb': round(total_size / (1024 * 1024), 2),
            'cache_directory': str(self.cache_dir.absolute())
        }
