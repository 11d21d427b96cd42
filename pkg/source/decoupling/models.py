from django.db import models


class ExperimentRecord(models.Model):
    experiment_id = models.CharField(max_length=200, verbose_name='Experiment')
    command = models.CharField(max_length=20, verbose_name='Command')
    all_hold = models.BooleanField(verbose_name='All checks hold')
    payload = models.TextField(verbose_name='JSON report')
    created_at = models.DateTimeField(auto_now_add=True, verbose_name='Recorded at')

    class Meta:
        ordering = ['-created_at', '-pk']

    def __str__(self):
        return self.experiment_id
