from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('experiment_id', models.CharField(max_length=200, verbose_name='Experiment')),
                ('command', models.CharField(max_length=20, verbose_name='Command')),
                ('all_hold', models.BooleanField(verbose_name='All checks hold')),
                ('payload', models.TextField(verbose_name='JSON report')),
                ('created_at', models.DateTimeField(auto_now_add=True, verbose_name='Recorded at')),
            ],
            options={
                'ordering': ['-created_at', '-pk'],
            },
        ),
    ]
