from sqlalchemy import Boolean, Column, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import relationship

from .database import Base


class Runs(Base):
    __tablename__ = 'runs'

    id = Column(Integer, primary_key=True, index=True)
    name = Column(String)
    method = Column(String, index=True)
    parameter = Column(String)
    config_hash = Column(String, index=True)
    config_text = Column(Text)
    degraded = Column(Boolean, default=False)
    mean_score = Column(Float, nullable=True)
    record_path = Column(String, nullable=True)
    # full RunRecord JSON, so reports can be rebuilt from the registry alone
    record_json = Column(Text)
    wall_clock = Column(Float)

    seeds = relationship('SeedResults', back_populates='run', cascade='all, delete-orphan')


class SeedResults(Base):
    __tablename__ = 'seed_results'

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey('runs.id'))
    seed_index = Column(Integer)
    seed = Column(String)
    win_rate = Column(Float, nullable=True)
    mean_return = Column(Float)
    attacked_steps = Column(String)
    mean_total_steps = Column(Float)
    failed = Column(Boolean, default=False)
    error = Column(String, nullable=True)

    run = relationship('Runs', back_populates='seeds')
